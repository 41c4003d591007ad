#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace didlpack {

// Byte-transparent retrieval of absolute URIs. Implementations that are
// safe for concurrent calls say so; otherwise callers serialize.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  // Raises Errc::fetch_failed / Errc::scheme_unsupported.
  virtual std::string fetch(const std::string& uri) = 0;
  virtual bool concurrent_safe() const { return false; }
};

// In-memory URI -> bytes table for tests and scripted pipelines.
class MapFetcher : public Fetcher {
 public:
  void add(std::string uri, std::string bytes) { entries_[std::move(uri)] = std::move(bytes); }
  std::string fetch(const std::string& uri) override;
  bool concurrent_safe() const override { return true; }

 private:
  std::map<std::string, std::string> entries_;
};

// file: URIs only; absolute paths, no base-directory resolution.
class FileFetcher : public Fetcher {
 public:
  std::string fetch(const std::string& uri) override;
  bool concurrent_safe() const override { return true; }
};

// http/https GET with manual redirect following (at most 5 hops).
class HttpFetcher : public Fetcher {
 public:
  explicit HttpFetcher(unsigned timeout_secs = 30) : timeout_secs_(timeout_secs) {}
  std::string fetch(const std::string& uri) override;
  bool concurrent_safe() const override { return true; }

 private:
  unsigned timeout_secs_;
};

// The CLI's fetcher: URI->path overrides first, then file:, then the
// network when enabled.
class StandardFetcher : public Fetcher {
 public:
  void map_uri(std::string uri, std::string path);
  // Lines of `URI<TAB>path`; relative paths resolve against the map
  // file's directory.
  void load_map_file(const std::string& path);
  void allow_network(bool allow) { allow_network_ = allow; }
  void set_timeout(unsigned secs) { timeout_secs_ = secs; }

  std::string fetch(const std::string& uri) override;
  bool concurrent_safe() const override { return true; }

 private:
  std::map<std::string, std::string> overrides_;  // uri -> filesystem path
  bool allow_network_ = false;
  unsigned timeout_secs_ = 30;
};

struct ResolvedResource {
  std::string bytes;
  std::string source_description;
  std::array<unsigned char, 32> digest_sha256;
};

// By Value -> base64-decoded payload; By Reference -> fetched bytes.
// Content encodings stay applied: resolution returns the stored bitstream.
ResolvedResource resolve_resource(const Resource& resource, Fetcher& fetcher);

// Returns a By Value resource carrying the resolved bytes; mimeType and
// contentEncodings unchanged. Identity on resources already By Value.
Resource embed_resource(const Resource& resource, Fetcher& fetcher);

class WriteSink {
 public:
  virtual ~WriteSink() = default;
  // Raises Errc::write_failed.
  virtual void write(std::string_view bytes) = 0;
};

class FileSink : public WriteSink {
 public:
  explicit FileSink(std::string path) : path_(std::move(path)) {}
  void write(std::string_view bytes) override;

 private:
  std::string path_;
};

// Writes the resolved bytes to the sink and returns a By Reference
// resource pointing at target_uri. The target URI must be absolute with
// scheme file/http/https; checked before anything is written.
Resource externalize_resource(const Resource& resource, Fetcher& fetcher,
                              const std::string& target_uri, WriteSink& sink);

struct BitEquivalenceEntry {
  std::size_t resource_ordinal = 0;  // 1-based
  std::optional<std::string> digest_hex;
  std::optional<std::string> error;
};

struct BitEquivalenceReport {
  std::vector<BitEquivalenceEntry> entries;  // document order
  bool equivalent = false;
};

// Resolves every resource of the component (in parallel when the fetcher
// allows it); equivalent only when all digests exist and agree.
BitEquivalenceReport check_bit_equivalence(const Component& component, Fetcher& fetcher);

// Applies decoders outermost-first. Supported codecs: gzip, identity.
// Raises Errc::unsupported_encoding / Errc::corrupt_stream.
std::string decode_content(std::string_view bytes, const std::vector<std::string>& encodings);

}  // namespace didlpack
