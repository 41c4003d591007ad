#pragma once

#include <string>
#include <vector>

#include "model.hpp"

namespace didlpack {

enum class Severity { error, warning, info };

const char* severity_name(Severity severity);

struct Finding {
  std::string rule_id;
  Severity severity = Severity::error;
  std::string location;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct ProfileReport {
  std::vector<Finding> findings;  // document position, then rule id
  bool passed = false;            // no error-severity findings

  bool has_rule(std::string_view rule_id) const;
  std::string to_json() const;
};

// Static validation against the OAIS preservation profile.
//
//   PR-01  exactly one top-level item                BAD shape   error
//   PR-02  no nested items                                       error
//   PR-03  item has a DII identifier, absolute URI               error*
//   PR-04  every component has a resource                        error
//   PR-05  every resource has a mimeType                         error
//   PR-06  provision is exactly ref or payload                   error
//   PR-07  ref scheme http/https/file                            warning
//   PR-08  XML statements hold one namespaced element            error
//   PR-09  representation info at item level                     warning
//   PR-10  component fixity matches the dsig subset and
//          its reference count equals the resource count         error
//   PR-11  DIDLDocumentId is an absolute URI                     error
//   PR-12  id values unique                                      error
//   PR-13  By Value payloads decode as base64                    error
//   PR-14  multi-resource component (dynamic check applies)      info
//   PR-15  misspelled dsig namespace in a fragment               warning
//
// *lenient downgrades PR-03 to a warning.
ProfileReport validate_profile(const DidlDocument& doc,
                               const NamespaceRegistry& registry = NamespaceRegistry::builtin(),
                               bool lenient = false);

// True when a finding's location path names a node of the document.
// Grammar: `/`, `/didlinfo`, `/didlinfo/block[i]`, `/item[i]?` followed by
// any of `/descriptor[j]`, `/statement[k]`, `/component[j]`,
// `/resource[k]`, `/item[j]`; indices 1-based.
bool location_resolves(const DidlDocument& doc, const std::string& path);

}  // namespace didlpack
