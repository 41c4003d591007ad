#include "resources.hpp"

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "base64.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "uri.hpp"

#include <httplib.h>

namespace didlpack {

namespace fs = std::filesystem;

namespace {

std::string read_file_bytes(const std::string& path, Errc errc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) raise(errc, "read error on " + path);
  return std::move(buf).str();
}

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path + query, at least "/"
};

UrlParts split_http_url(const std::string& uri) {
  auto scheme_end = uri.find("://");
  if (scheme_end == std::string::npos) {
    raise(Errc::fetch_failed, "malformed URL " + uri);
  }
  auto path_start = uri.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {uri, "/"};
  return {uri.substr(0, path_start), uri.substr(path_start)};
}

std::string http_get(const std::string& uri, unsigned timeout_secs) {
  std::string current = uri;
  for (int hop = 0; hop <= 5; ++hop) {
    UrlParts parts = split_http_url(current);
    httplib::Client client(parts.origin);
    client.set_follow_location(false);
    client.set_connection_timeout(timeout_secs, 0);
    client.set_read_timeout(timeout_secs, 0);
    auto res = client.Get(parts.target);
    if (!res) {
      raise(Errc::fetch_failed, "GET " + current + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status >= 300 && res->status < 400) {
      std::string location = res->get_header_value("Location");
      if (location.empty()) {
        raise(Errc::fetch_failed, "GET " + current + ": redirect without Location");
      }
      if (location[0] == '/') {
        current = parts.origin + location;
      } else {
        std::string scheme = uri_scheme(location);
        if (scheme != "http" && scheme != "https") {
          raise(Errc::fetch_failed, "GET " + current + ": unsupported redirect target " + location);
        }
        current = location;
      }
      continue;
    }
    if (res->status != 200) {
      raise(Errc::fetch_failed, "GET " + current + " returned status " + std::to_string(res->status));
    }
    return res->body;
  }
  raise(Errc::fetch_failed, "GET " + uri + ": more than 5 redirects");
}

}  // namespace

std::string MapFetcher::fetch(const std::string& uri) {
  auto it = entries_.find(uri);
  if (it == entries_.end()) raise(Errc::fetch_failed, "no mapping for " + uri);
  return it->second;
}

std::string FileFetcher::fetch(const std::string& uri) {
  std::string scheme = uri_scheme(uri);
  if (scheme != "file") raise(Errc::scheme_unsupported, "scheme \"" + scheme + "\" not supported here");
  return read_file_bytes(file_uri_to_path(uri), Errc::fetch_failed);
}

std::string HttpFetcher::fetch(const std::string& uri) {
  std::string scheme = uri_scheme(uri);
  if (scheme != "http" && scheme != "https") {
    raise(Errc::scheme_unsupported, "scheme \"" + scheme + "\" not supported here");
  }
  return http_get(uri, timeout_secs_);
}

void StandardFetcher::map_uri(std::string uri, std::string path) {
  overrides_[std::move(uri)] = std::move(path);
}

void StandardFetcher::load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open fetch map " + path);
  fs::path base = fs::path(path).parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      raise(Errc::io_error, path + ":" + std::to_string(line_no) + ": expected `URI<TAB>path`");
    }
    fs::path target(line.substr(tab + 1));
    if (target.is_relative()) target = base / target;
    map_uri(line.substr(0, tab), target.string());
  }
}

std::string StandardFetcher::fetch(const std::string& uri) {
  auto it = overrides_.find(uri);
  if (it != overrides_.end()) return read_file_bytes(it->second, Errc::fetch_failed);
  std::string scheme = uri_scheme(uri);
  if (scheme == "file") {
    return read_file_bytes(file_uri_to_path(uri), Errc::fetch_failed);
  }
  if (scheme == "http" || scheme == "https") {
    if (!allow_network_) {
      raise(Errc::scheme_unsupported,
            "network fetching is disabled (no --allow-network) and " + uri + " has no fetch-map entry");
    }
    return http_get(uri, timeout_secs_);
  }
  raise(Errc::scheme_unsupported, "scheme \"" + scheme + "\" of " + uri + " is not supported");
}

ResolvedResource resolve_resource(const Resource& resource, Fetcher& fetcher) {
  ResolvedResource resolved;
  if (resource.payload && resource.ref) {
    raise(Errc::invalid_argument, "resource is both By Value and By Reference");
  }
  if (resource.payload) {
    resolved.bytes = base64_decode(*resource.payload);
    resolved.source_description = "embedded base64 payload";
  } else if (resource.ref) {
    resolved.bytes = fetcher.fetch(*resource.ref);
    resolved.source_description = *resource.ref;
  } else {
    raise(Errc::invalid_argument, "resource has no provision");
  }
  resolved.digest_sha256 = sha256(resolved.bytes);
  return resolved;
}

Resource embed_resource(const Resource& resource, Fetcher& fetcher) {
  if (resource.by_value()) return resource;
  ResolvedResource resolved = resolve_resource(resource, fetcher);
  Resource out = resource;
  out.ref.reset();
  out.payload = base64_encode(resolved.bytes);
  return out;
}

void FileSink::write(std::string_view bytes) {
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::write_failed, "cannot open " + path_ + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) raise(Errc::write_failed, "write error on " + path_);
}

Resource externalize_resource(const Resource& resource, Fetcher& fetcher,
                              const std::string& target_uri, WriteSink& sink) {
  std::string scheme = uri_scheme(target_uri);
  if (!is_absolute_uri(target_uri) || (scheme != "file" && scheme != "http" && scheme != "https")) {
    raise(Errc::invalid_argument,
          "externalize target must be an absolute file/http/https URI, got \"" + target_uri + "\"");
  }
  ResolvedResource resolved = resolve_resource(resource, fetcher);
  sink.write(resolved.bytes);
  Resource out = resource;
  out.payload.reset();
  out.ref = target_uri;
  return out;
}

BitEquivalenceReport check_bit_equivalence(const Component& component, Fetcher& fetcher) {
  BitEquivalenceReport report;
  std::size_t n = component.resources.size();
  report.entries.resize(n);

  auto resolve_one = [&](std::size_t i) {
    BitEquivalenceEntry entry;
    entry.resource_ordinal = i + 1;
    try {
      entry.digest_hex = to_hex(resolve_resource(component.resources[i], fetcher).digest_sha256);
    } catch (const Error& e) {
      entry.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
    return entry;
  };

  if (fetcher.concurrent_safe() && n > 1) {
    std::vector<std::future<BitEquivalenceEntry>> futures;
    futures.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      futures.push_back(std::async(std::launch::async, resolve_one, i));
    }
    for (std::size_t i = 0; i < n; ++i) report.entries[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < n; ++i) report.entries[i] = resolve_one(i);
  }

  report.equivalent = true;
  const std::string* first = nullptr;
  for (const auto& entry : report.entries) {
    if (!entry.digest_hex) {
      report.equivalent = false;
    } else if (first == nullptr) {
      first = &*entry.digest_hex;
    } else if (*entry.digest_hex != *first) {
      report.equivalent = false;
    }
  }
  return report;
}

namespace {

std::string gunzip(std::string_view bytes) {
  z_stream stream{};
  // 15 window bits + 16 selects the gzip wrapper.
  if (inflateInit2(&stream, 15 + 16) != Z_OK) {
    raise(Errc::corrupt_stream, "gzip: cannot initialize inflate");
  }
  std::string out;
  std::array<unsigned char, 16384> chunk{};
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  stream.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  do {
    stream.next_out = chunk.data();
    stream.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&stream, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&stream);
      raise(Errc::corrupt_stream, std::string("gzip: ") + (stream.msg ? stream.msg : "corrupt stream"));
    }
    out.append(reinterpret_cast<char*>(chunk.data()), chunk.size() - stream.avail_out);
  } while (rc != Z_STREAM_END && (stream.avail_in > 0 || stream.avail_out == 0));
  inflateEnd(&stream);
  if (rc != Z_STREAM_END) raise(Errc::corrupt_stream, "gzip: truncated stream");
  return out;
}

}  // namespace

std::string decode_content(std::string_view bytes, const std::vector<std::string>& encodings) {
  for (const auto& encoding : encodings) {
    if (encoding != "gzip" && encoding != "identity") {
      raise(Errc::unsupported_encoding, "content encoding \"" + encoding + "\" is not supported");
    }
  }
  std::string current(bytes);
  for (const auto& encoding : encodings) {
    if (encoding == "gzip") current = gunzip(current);
  }
  return current;
}

}  // namespace didlpack
