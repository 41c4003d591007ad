#include "fixity.hpp"

#include <json.hpp>

#include "base64.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "xmlio.hpp"

namespace didlpack {

namespace {

constexpr AlgorithmInfo kAlgorithms[] = {
    {"http://www.w3.org/2001/04/xmlenc#sha256", 32, false},
    {"http://www.w3.org/2000/09/xmldsig#sha1", 20, true},
};

std::string trim_ws(std::string_view s) {
  std::size_t b = 0, e = s.size();
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

const AlgorithmInfo* find_algorithm(std::string_view uri) {
  for (const auto& algo : kAlgorithms) {
    if (uri == algo.uri) return &algo;
  }
  return nullptr;
}

FixityRecord compute_digest(std::string_view bytes, const std::string& algorithm_uri) {
  const AlgorithmInfo* algo = find_algorithm(algorithm_uri);
  if (algo == nullptr) {
    raise(Errc::unsupported_algorithm, "digest algorithm \"" + algorithm_uri + "\" is not in the registry");
  }
  FixityRecord record;
  record.algorithm_uri = algorithm_uri;
  if (algo->digest_len == 32) {
    auto d = sha256(bytes);
    record.digest.assign(reinterpret_cast<const char*>(d.data()), d.size());
  } else {
    auto d = sha1(bytes);
    record.digest.assign(reinterpret_cast<const char*>(d.data()), d.size());
  }
  return record;
}

Statement make_fixity_statement(const std::vector<FixityRecord>& records) {
  if (records.empty()) raise(Errc::empty_record_list, "a fixity statement needs at least one record");
  std::string raw = "<dsig:Signature xmlns:dsig=\"" + std::string(kDsigNs) + "\"><dsig:SignedInfo>";
  for (const auto& record : records) {
    raw += "<dsig:Reference";
    if (record.reference_uri) raw += " URI=\"" + xml_escape(*record.reference_uri) + "\"";
    raw += "><dsig:DigestMethod Algorithm=\"" + xml_escape(record.algorithm_uri) + "\"/>";
    raw += "<dsig:DigestValue>" + base64_encode(record.digest) + "</dsig:DigestValue>";
    raw += "</dsig:Reference>";
  }
  raw += "</dsig:SignedInfo></dsig:Signature>";
  XmlFragment fragment{std::move(raw), kDsigNs, "Signature", false};
  return Statement::xml("application/xml; charset=utf-8", std::move(fragment));
}

namespace {

[[noreturn]] void malformed(const std::string& what) { raise(Errc::malformed_fixity, what); }

bool ws_only_text(const XmlNode& node) {
  const auto* t = std::get_if<XmlText>(&node);
  if (t == nullptr) return false;
  return trim_ws(t->value).empty();
}

SignatureReference parse_reference(const XmlElement& ref_el) {
  SignatureReference reference;
  if (const XmlAttr* uri = ref_el.find_attr("", "URI")) reference.uri = uri->value;
  bool have_method = false;
  bool have_value = false;
  for (const auto& node : ref_el.children) {
    if (ws_only_text(node)) continue;
    const auto* el = std::get_if<XmlElement>(&node);
    if (el == nullptr) malformed("unexpected text inside dsig:Reference");
    if (el->is(kDsigNs, "DigestMethod")) {
      if (have_method) malformed("dsig:Reference with multiple DigestMethod elements");
      have_method = true;
      const XmlAttr* algo = el->find_attr("", "Algorithm");
      if (algo == nullptr) malformed("dsig:DigestMethod without Algorithm attribute");
      reference.algorithm_uri = algo->value;
    } else if (el->is(kDsigNs, "DigestValue")) {
      if (have_value) malformed("dsig:Reference with multiple DigestValue elements");
      have_value = true;
      reference.digest_b64 = trim_ws(el->text());
    } else if (el->is(kDsigNs, "Transforms")) {
      // parsed and ignored; recorded by the caller via SignatureInfo
    } else {
      malformed("unsupported element {" + el->ns + "}" + el->local + " inside dsig:Reference");
    }
  }
  if (!have_method) malformed("dsig:Reference without DigestMethod");
  if (!have_value) malformed("dsig:Reference without DigestValue");
  return reference;
}

}  // namespace

SignatureInfo parse_signature(const XmlFragment& fragment) {
  XmlElement root = xml_parse_fragment(fragment.raw);
  if (!root.is(kDsigNs, "Signature")) {
    malformed("fixity fragment root is {" + root.ns + "}" + root.local + ", expected dsig:Signature");
  }
  SignatureInfo info;
  const XmlElement* signed_info = nullptr;
  for (const auto& node : root.children) {
    if (ws_only_text(node)) continue;
    const auto* el = std::get_if<XmlElement>(&node);
    if (el == nullptr) malformed("unexpected text inside dsig:Signature");
    if (el->is(kDsigNs, "SignedInfo")) {
      if (signed_info != nullptr) malformed("multiple dsig:SignedInfo elements");
      signed_info = el;
    } else {
      info.ignored_elements.push_back(el->prefix.empty() ? el->local : el->prefix + ":" + el->local);
    }
  }
  if (signed_info == nullptr) malformed("dsig:Signature without SignedInfo");
  for (const auto& node : signed_info->children) {
    if (ws_only_text(node)) continue;
    const auto* el = std::get_if<XmlElement>(&node);
    if (el == nullptr) malformed("unexpected text inside dsig:SignedInfo");
    if (el->is(kDsigNs, "Reference")) {
      const XmlElement& ref_el = *el;
      SignatureReference reference = parse_reference(ref_el);
      for (const auto& child : ref_el.children) {
        if (const auto* t = std::get_if<XmlElement>(&child)) {
          if (t->is(kDsigNs, "Transforms")) info.ignored_elements.push_back("dsig:Transforms");
        }
      }
      info.references.push_back(std::move(reference));
    } else if (el->is(kDsigNs, "CanonicalizationMethod") || el->is(kDsigNs, "SignatureMethod")) {
      info.ignored_elements.push_back(el->prefix.empty() ? el->local : el->prefix + ":" + el->local);
    } else {
      malformed("unsupported element {" + el->ns + "}" + el->local + " inside dsig:SignedInfo");
    }
  }
  return info;
}

const char* fixity_status_name(FixityStatus status) {
  switch (status) {
    case FixityStatus::match: return "match";
    case FixityStatus::mismatch: return "mismatch";
    case FixityStatus::no_fixity_info: return "no-fixity-info";
    case FixityStatus::unverifiable: return "unverifiable";
  }
  return "unverifiable";
}

namespace {

// Compares one parsed reference against bytes; fills a detail row.
void compare_reference(const SignatureReference& reference, const std::string* bytes,
                       const std::string& resolve_error, VerificationOutcome& outcome) {
  FixityDetail detail;
  detail.reference_uri = reference.uri;

  const AlgorithmInfo* algo = find_algorithm(reference.algorithm_uri);
  if (algo == nullptr) {
    malformed("digest algorithm \"" + reference.algorithm_uri + "\" is not in the registry");
  }
  std::string expected;
  try {
    expected = base64_decode(reference.digest_b64);
  } catch (const Error&) {
    malformed("DigestValue is not valid base64");
  }
  if (expected.size() != algo->digest_len) {
    malformed("DigestValue length does not match " + reference.algorithm_uri);
  }
  detail.expected_hex = to_hex(reinterpret_cast<const unsigned char*>(expected.data()), expected.size());

  if (bytes == nullptr) {
    detail.note = resolve_error;
    outcome.details.push_back(std::move(detail));
    if (outcome.status != FixityStatus::mismatch) outcome.status = FixityStatus::unverifiable;
    return;
  }
  FixityRecord actual = compute_digest(*bytes, reference.algorithm_uri);
  detail.actual_hex = to_hex(reinterpret_cast<const unsigned char*>(actual.digest.data()), actual.digest.size());
  if (algo->verify_only) detail.note = "deprecated digest algorithm";
  if (actual.digest != expected) {
    outcome.status = FixityStatus::mismatch;
  }
  outcome.details.push_back(std::move(detail));
}

}  // namespace

VerificationOutcome verify_component_fixity(const Component& component, Fetcher& fetcher,
                                            const NamespaceRegistry& registry) {
  auto statements = find_statements(component, SemanticKind::fixity(), registry);
  VerificationOutcome outcome;
  if (statements.empty()) {
    outcome.status = FixityStatus::no_fixity_info;
    return outcome;
  }
  outcome.status = FixityStatus::match;

  // Resolve each resource once, lazily; remember failures per resource.
  std::vector<std::optional<std::string>> bytes(component.resources.size());
  std::vector<std::string> errors(component.resources.size());
  auto resource_bytes = [&](std::size_t index) -> const std::string* {
    if (index >= component.resources.size()) return nullptr;
    if (!bytes[index] && errors[index].empty()) {
      try {
        bytes[index] = resolve_resource(component.resources[index], fetcher).bytes;
      } catch (const Error& e) {
        errors[index] = std::string(errc_name(e.code())) + ": " + e.what();
      }
    }
    return bytes[index] ? &*bytes[index] : nullptr;
  };

  for (const Statement* statement : statements) {
    SignatureInfo info = parse_signature(*statement->fragment());
    for (std::size_t k = 0; k < info.references.size(); ++k) {
      const SignatureReference& reference = info.references[k];
      std::size_t index = component.resources.size();  // sentinel: unmatched
      if (reference.uri) {
        for (std::size_t r = 0; r < component.resources.size(); ++r) {
          if (component.resources[r].ref == *reference.uri) {
            index = r;
            break;
          }
        }
        if (index == component.resources.size()) {
          compare_reference(reference, nullptr, "no resource matches URI " + *reference.uri, outcome);
          continue;
        }
      } else {
        index = k;
        if (index >= component.resources.size()) {
          compare_reference(reference, nullptr, "no resource at ordinal " + std::to_string(k + 1), outcome);
          continue;
        }
      }
      const std::string* resolved = resource_bytes(index);
      compare_reference(reference, resolved, resolved ? "" : errors[index], outcome);
    }
  }
  return outcome;
}

namespace {

bool is_fixity_block(const XmlFragment& block, const NamespaceRegistry& registry) {
  return registry.classify_namespace(block.root_namespace).kind == Kind::fixity &&
         block.root_local_name == "Signature";
}

}  // namespace

DidlDocument attach_package_fixity(const DidlDocument& doc, const std::string& algorithm_uri) {
  const AlgorithmInfo* algo = find_algorithm(algorithm_uri);
  if (algo == nullptr || algo->verify_only) {
    raise(Errc::unsupported_algorithm,
          "package fixity cannot be written with \"" + algorithm_uri + "\"");
  }
  std::string body = canonicalize(doc, true);
  FixityRecord record = compute_digest(body, algorithm_uri);
  Statement statement = make_fixity_statement({record});

  DidlDocument out = doc;
  std::erase_if(out.info_blocks, [&](const XmlFragment& block) {
    return is_fixity_block(block, NamespaceRegistry::builtin());
  });
  out.info_blocks.push_back(*statement.fragment());
  return out;
}

VerificationOutcome verify_package_fixity(const DidlDocument& doc, const NamespaceRegistry& registry) {
  VerificationOutcome outcome;
  const XmlFragment* fixity_block = nullptr;
  for (const auto& block : doc.info_blocks) {
    if (is_fixity_block(block, registry)) {
      if (fixity_block != nullptr) malformed("multiple package fixity blocks in DIDLInfo");
      fixity_block = &block;
    }
  }
  if (fixity_block == nullptr) {
    outcome.status = FixityStatus::no_fixity_info;
    return outcome;
  }
  SignatureInfo info = parse_signature(*fixity_block);
  if (info.references.size() != 1) {
    malformed("package fixity needs exactly one dsig:Reference, found " +
              std::to_string(info.references.size()));
  }
  if (info.references[0].uri) {
    malformed("package fixity reference must not carry a URI attribute");
  }
  outcome.status = FixityStatus::match;
  std::string body = canonicalize(doc, true);
  compare_reference(info.references[0], &body, "", outcome);
  return outcome;
}

DocumentVerification verify_document(const DidlDocument& doc, Fetcher& fetcher, unsigned checks,
                                     const NamespaceRegistry& registry) {
  DocumentVerification result;
  const Item& item = doc.item();
  if (checks & kVerifyComponents) {
    for (std::size_t c = 0; c < item.components.size(); ++c) {
      ComponentVerification cv;
      cv.component_ordinal = c + 1;
      try {
        cv.fixity = verify_component_fixity(item.components[c], fetcher, registry);
        if (cv.fixity->status == FixityStatus::mismatch) result.ok = false;
        if (cv.fixity->status == FixityStatus::unverifiable) {
          result.ok = false;
          result.fetch_trouble = true;
        }
      } catch (const Error& e) {
        cv.error = e.what();
        result.ok = false;
      }
      result.components.push_back(std::move(cv));
    }
  }
  if (checks & kVerifyPackage) {
    try {
      result.package = verify_package_fixity(doc, registry);
      if (result.package->status == FixityStatus::mismatch) result.ok = false;
    } catch (const Error& e) {
      result.package_error = e.what();
      result.ok = false;
    }
  }
  if (checks & kVerifyBitEquivalence) {
    for (std::size_t c = 0; c < item.components.size(); ++c) {
      if (item.components[c].resources.size() < 2) continue;
      BitEquivalenceReport report = check_bit_equivalence(item.components[c], fetcher);
      if (!report.equivalent) {
        result.ok = false;
        for (const auto& entry : report.entries) {
          if (entry.error) result.fetch_trouble = true;
        }
      }
      result.bit_equivalence.emplace_back(c + 1, std::move(report));
    }
  }
  return result;
}

std::string verification_to_json(const DocumentVerification& verification) {
  nlohmann::json doc;
  doc["ok"] = verification.ok;
  auto outcome_json = [](const VerificationOutcome& outcome) {
    nlohmann::json j;
    j["status"] = fixity_status_name(outcome.status);
    j["details"] = nlohmann::json::array();
    for (const auto& detail : outcome.details) {
      nlohmann::json d;
      if (detail.reference_uri) d["referenceUri"] = *detail.reference_uri;
      d["expected"] = detail.expected_hex;
      if (detail.actual_hex) d["actual"] = *detail.actual_hex;
      if (!detail.note.empty()) d["note"] = detail.note;
      j["details"].push_back(std::move(d));
    }
    return j;
  };
  doc["components"] = nlohmann::json::array();
  for (const auto& cv : verification.components) {
    nlohmann::json j;
    j["component"] = cv.component_ordinal;
    if (cv.fixity) {
      j.update(outcome_json(*cv.fixity));
    } else if (cv.error) {
      j["status"] = "malformed";
      j["error"] = *cv.error;
    }
    doc["components"].push_back(std::move(j));
  }
  if (verification.package) {
    doc["package"] = outcome_json(*verification.package);
  } else if (verification.package_error) {
    doc["package"] = {{"status", "malformed"}, {"error", *verification.package_error}};
  }
  doc["bitEquivalence"] = nlohmann::json::array();
  for (const auto& [ordinal, report] : verification.bit_equivalence) {
    nlohmann::json j;
    j["component"] = ordinal;
    j["equivalent"] = report.equivalent;
    j["resources"] = nlohmann::json::array();
    for (const auto& entry : report.entries) {
      nlohmann::json e;
      e["resource"] = entry.resource_ordinal;
      if (entry.digest_hex) e["sha256"] = *entry.digest_hex;
      if (entry.error) e["error"] = *entry.error;
      j["resources"].push_back(std::move(e));
    }
    doc["bitEquivalence"].push_back(std::move(j));
  }
  return doc.dump(2);
}

}  // namespace didlpack
