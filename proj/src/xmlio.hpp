#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace didlpack {

struct ParseOutcome {
  DidlDocument document;
  std::vector<Warning> warnings;
};

// Parses DIDL bytes into the profiled model.
//
// Raises Errc::malformed_xml (with line/column), Errc::not_didl when the
// root is not {urn:mpeg:mpeg21:2002:02-DIDL-NS}DIDL, and
// Errc::profile_shape for structure the profile cannot represent
// (including zero or multiple top-level items).
//
// Warning codes: W-DSIG-TYPO (misspelled dsig namespace accepted and
// normalized), W-NS-INHERITED (fragment needed namespace declarations
// copied from an ancestor), W-IGNORED-ATTR (unknown attribute on a
// DIDL-level element dropped).
ParseOutcome parse_didl(std::string_view bytes);

// Canonical serialization. Raises Errc::invariant_violation naming the
// first failed model invariant and its location.
std::string serialize_didl(const DidlDocument& doc);

// Like serialize_didl; with exclude_info_blocks the DIDLInfo element and
// all its children are omitted entirely (the package-fixity digest scope).
std::string canonicalize(const DidlDocument& doc, bool exclude_info_blocks);

}  // namespace didlpack
