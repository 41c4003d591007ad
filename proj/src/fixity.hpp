#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "resources.hpp"

namespace didlpack {

inline constexpr const char* kSha256Uri = "http://www.w3.org/2001/04/xmlenc#sha256";
inline constexpr const char* kSha1Uri = "http://www.w3.org/2000/09/xmldsig#sha1";

struct AlgorithmInfo {
  const char* uri;
  std::size_t digest_len;
  bool verify_only;  // sha1 is accepted when reading, never written
};

// nullptr when the URI is not in the registry.
const AlgorithmInfo* find_algorithm(std::string_view uri);

struct FixityRecord {
  std::string algorithm_uri;
  std::string digest;  // raw bytes, length per algorithm
  std::optional<std::string> reference_uri;

  bool operator==(const FixityRecord&) const = default;
};

// Raises Errc::unsupported_algorithm.
FixityRecord compute_digest(std::string_view bytes, const std::string& algorithm_uri);

// Minimal dsig subset: Signature > SignedInfo > Reference (DigestMethod,
// DigestValue), one Reference per record, URI attribute iff the record
// names one. Raises Errc::empty_record_list.
Statement make_fixity_statement(const std::vector<FixityRecord>& records);

// Parsed shape of a fixity fragment.
struct SignatureReference {
  std::optional<std::string> uri;
  std::string algorithm_uri;
  std::string digest_b64;
};

struct SignatureInfo {
  std::vector<SignatureReference> references;
  std::vector<std::string> ignored_elements;  // SignatureValue, KeyInfo, Transforms, ...
};

// Raises Errc::malformed_fixity when the fragment violates the subset.
SignatureInfo parse_signature(const XmlFragment& fragment);

enum class FixityStatus { match, mismatch, no_fixity_info, unverifiable };

const char* fixity_status_name(FixityStatus status);

struct FixityDetail {
  std::optional<std::string> reference_uri;
  std::string expected_hex;
  std::optional<std::string> actual_hex;
  std::string note;
};

struct VerificationOutcome {
  FixityStatus status = FixityStatus::no_fixity_info;
  std::vector<FixityDetail> details;
};

// Compares every dsig Reference of the component's fixity statements
// against recomputed digests of the resolved stored bitstreams.
// References pair by URI when they carry one, by ordinal otherwise.
VerificationOutcome verify_component_fixity(const Component& component, Fetcher& fetcher,
                                            const NamespaceRegistry& registry = NamespaceRegistry::builtin());

// Digest over canonicalize(doc, exclude_info_blocks=true), wrapped as the
// single package-fixity info block (replacing any prior one).
DidlDocument attach_package_fixity(const DidlDocument& doc,
                                   const std::string& algorithm_uri = kSha256Uri);

VerificationOutcome verify_package_fixity(const DidlDocument& doc,
                                          const NamespaceRegistry& registry = NamespaceRegistry::builtin());

// ---------------------------------------------------------------------------
// Whole-document verification (CLI/report backend)

enum VerifyChecks : unsigned {
  kVerifyComponents = 1u << 0,
  kVerifyPackage = 1u << 1,
  kVerifyBitEquivalence = 1u << 2,
  kVerifyAll = kVerifyComponents | kVerifyPackage | kVerifyBitEquivalence,
};

struct ComponentVerification {
  std::size_t component_ordinal = 0;  // 1-based
  std::optional<VerificationOutcome> fixity;  // absent when the fragment was malformed
  std::optional<std::string> error;           // MalformedFixity message
};

struct DocumentVerification {
  std::vector<ComponentVerification> components;
  std::optional<VerificationOutcome> package;
  std::optional<std::string> package_error;
  std::vector<std::pair<std::size_t, BitEquivalenceReport>> bit_equivalence;  // multi-resource components
  bool ok = true;          // nothing failed
  bool fetch_trouble = false;  // some check could not resolve its bytes
};

DocumentVerification verify_document(const DidlDocument& doc, Fetcher& fetcher,
                                     unsigned checks = kVerifyAll,
                                     const NamespaceRegistry& registry = NamespaceRegistry::builtin());

// JSON rendering shared by the verify and unpack reports.
std::string verification_to_json(const DocumentVerification& verification);

}  // namespace didlpack
