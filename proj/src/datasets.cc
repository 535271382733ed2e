// Copyright 2026 The petbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "petbench/datasets.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>
#include <zlib.h>

#include "petbench/error.h"

#ifndef PETBENCH_RESOURCE_DIR
#define PETBENCH_RESOURCE_DIR "."
#endif

namespace petbench {

namespace fs = std::filesystem;

const std::vector<DatasetInfo>& KnownDatasets() {
  static const std::vector<DatasetInfo> datasets = [] {
    std::vector<DatasetInfo> out;
    DatasetInfo census;
    census.id = "census_income";
    census.data_file = "adult.data";
    census.dialect = CsvDialect::kComma;
    census.header = false;
    census.schema_file = "census_income.schema.json";
    census.hierarchy_file = "census_income.hierarchies.json";
    census.base_url = "https://archive.ics.uci.edu/ml/machine-learning-databases/adult";
    census.downloads = {
        {"adult.data", "adult.data", "5b00264637dbfec36bdeaab5676b0b309ff9eb788d63554ca0a249491c86603d"},
        {"adult.names", "adult.names", "c248284c0b5de30c9e1958d6cdd168a34a654758b620e68f46aefa83fc0a576a"},
    };
    out.push_back(std::move(census));

    DatasetInfo student;
    student.id = "student_performance";
    student.data_file = "student-mat.csv";
    student.dialect = CsvDialect::kSemicolon;
    student.header = true;
    student.schema_file = "student_performance.schema.json";
    student.hierarchy_file = "student_performance.hierarchies.json";
    student.base_url = "https://archive.ics.uci.edu/static/public/320";
    student.downloads = {{"student_performance.zip", "student+performance.zip", std::nullopt}};
    student.extracted = {{"student_performance.zip", "student-mat.csv"},
                         {"student_performance.zip", "student-por.csv"}};
    out.push_back(std::move(student));
    return out;
  }();
  return datasets;
}

const DatasetInfo& FindDataset(std::string_view id) {
  for (const auto& d : KnownDatasets())
    if (d.id == id) return d;
  std::string known;
  for (const auto& d : KnownDatasets()) known += (known.empty() ? "" : ", ") + d.id;
  throw Error(ErrorCode::kConfig, "unknown dataset '" + std::string(id) + "' (known: " + known + ")");
}

fs::path ResourceRoot() {
  if (const char* env = std::getenv("PETBENCH_HOME"); env && *env) return env;
  return PETBENCH_RESOURCE_DIR;
}

fs::path DefaultDataDir() { return ResourceRoot() / "data"; }
fs::path DefaultSchemaPath(const DatasetInfo& info) { return ResourceRoot() / "config" / info.schema_file; }
fs::path DefaultHierarchyPath(const DatasetInfo& info) { return ResourceRoot() / "config" / info.hierarchy_file; }

std::string Sha256Hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

namespace {

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes <path>.part, then renames it over <path>.
void WriteAtomically(const fs::path& path, std::string_view bytes) {
  const fs::path part = path.string() + ".part";
  {
    std::ofstream out(part, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      fs::remove(part, ec);
      throw Error(ErrorCode::kIoError, "cannot write " + part.string());
    }
  }
  fs::rename(part, path);
}

std::uint32_t Le32(std::string_view s, std::size_t at) {
  if (at + 4 > s.size()) throw Error(ErrorCode::kParseError, "truncated zip");
  const auto* p = reinterpret_cast<const unsigned char*>(s.data() + at);
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t Le16(std::string_view s, std::size_t at) {
  if (at + 2 > s.size()) throw Error(ErrorCode::kParseError, "truncated zip");
  const auto* p = reinterpret_cast<const unsigned char*>(s.data() + at);
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::string Inflate(std::string_view data, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(ErrorCode::kParseError, "inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) throw Error(ErrorCode::kParseError, "corrupt deflate data");
  return out;
}

struct ZipEntry {
  std::string name;
  std::uint16_t method = 0;
  std::uint32_t crc = 0;
  std::uint32_t compressed = 0;
  std::uint32_t size = 0;
  std::uint32_t local_offset = 0;
};

std::vector<ZipEntry> ZipDirectory(std::string_view zip) {
  if (zip.size() < 22) throw Error(ErrorCode::kParseError, "not a zip archive");
  std::size_t eocd = std::string_view::npos;
  for (std::size_t i = zip.size() - 22 + 1; i-- > 0;) {
    if (Le32(zip, i) == 0x06054b50) {
      eocd = i;
      break;
    }
    if (zip.size() - i > 22 + 65535) break;
  }
  if (eocd == std::string_view::npos) throw Error(ErrorCode::kParseError, "zip end record not found");
  const std::uint16_t count = Le16(zip, eocd + 10);
  std::size_t at = Le32(zip, eocd + 16);
  std::vector<ZipEntry> out;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (Le32(zip, at) != 0x02014b50) throw Error(ErrorCode::kParseError, "bad zip central directory");
    ZipEntry e;
    e.method = Le16(zip, at + 10);
    e.crc = Le32(zip, at + 16);
    e.compressed = Le32(zip, at + 20);
    e.size = Le32(zip, at + 24);
    const std::uint16_t name_len = Le16(zip, at + 28);
    const std::uint16_t extra_len = Le16(zip, at + 30);
    const std::uint16_t comment_len = Le16(zip, at + 32);
    e.local_offset = Le32(zip, at + 42);
    if (at + 46 + name_len > zip.size()) throw Error(ErrorCode::kParseError, "truncated zip");
    e.name = std::string(zip.substr(at + 46, name_len));
    out.push_back(std::move(e));
    at += 46 + name_len + extra_len + comment_len;
  }
  return out;
}

std::string ReadZipEntry(std::string_view zip, const ZipEntry& e) {
  const std::size_t at = e.local_offset;
  if (Le32(zip, at) != 0x04034b50) throw Error(ErrorCode::kParseError, "bad zip local header");
  const std::size_t data_at = at + 30 + Le16(zip, at + 26) + Le16(zip, at + 28);
  if (data_at + e.compressed > zip.size()) throw Error(ErrorCode::kParseError, "truncated zip entry " + e.name);
  const std::string_view raw = zip.substr(data_at, e.compressed);
  std::string out;
  if (e.method == 0) {
    out = std::string(raw);
  } else if (e.method == 8) {
    out = Inflate(raw, e.size);
  } else {
    throw Error(ErrorCode::kParseError, "unsupported zip method " + std::to_string(e.method));
  }
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
  if (crc != e.crc) throw Error(ErrorCode::kParseError, "crc mismatch in zip entry " + e.name);
  return out;
}

std::string BaseName(std::string_view name) {
  const auto slash = name.find_last_of('/');
  return std::string(slash == std::string_view::npos ? name : name.substr(slash + 1));
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::optional<std::string> FindMember(std::string_view zip, std::string_view member, int depth) {
  const auto entries = ZipDirectory(zip);
  for (const auto& e : entries)
    if (BaseName(e.name) == member) return ReadZipEntry(zip, e);
  if (depth >= 3) return std::nullopt;
  for (const auto& e : entries) {
    if (!EndsWith(e.name, ".zip")) continue;
    const std::string inner = ReadZipEntry(zip, e);
    if (auto found = FindMember(inner, member, depth + 1)) return found;
  }
  return std::nullopt;
}

std::string HttpGet(const std::string& url, int timeout_seconds) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kNetworkError, "bad url " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  auto res = client.Get(path);
  if (!res) throw Error(ErrorCode::kNetworkError, "GET " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(ErrorCode::kNetworkError, "GET " + url + ": HTTP " + std::to_string(res->status));
  }
  return std::move(res->body);
}

fs::path Sidecar(const fs::path& file) { return file.string() + ".sha256"; }

// Digest the file must have, or nullopt when nothing is recorded yet.
std::optional<std::string> ExpectedDigest(const fs::path& file, const std::optional<std::string>& pin) {
  if (pin) return pin;
  if (!fs::exists(Sidecar(file))) return std::nullopt;
  std::string s = ReadAll(Sidecar(file));
  s = s.substr(0, s.find_first_of(" \n\r\t"));
  return s;
}

void Verify(const fs::path& file, const std::string& expected) {
  const std::string actual = Sha256File(file);
  if (actual != expected) {
    throw Error(ErrorCode::kDigestMismatch,
                file.string() + " has sha256 " + actual + ", expected " + expected);
  }
}

}  // namespace

std::string Sha256File(const fs::path& path) { return Sha256Hex(ReadAll(path)); }

std::string ExtractZipMember(std::string_view zip, std::string_view member) {
  auto found = FindMember(zip, member, 0);
  if (!found) throw Error(ErrorCode::kParseError, "archive has no member " + std::string(member));
  return *std::move(found);
}

std::vector<fs::path> FetchDataset(std::string_view id, const fs::path& dest, const FetchOptions& options) {
  const DatasetInfo& info = FindDataset(id);
  const fs::path dir = dest / info.id;
  fs::create_directories(dir);

  std::string base = options.base_url;
  if (base.empty()) {
    if (const char* env = std::getenv("PETBENCH_MIRROR"); env && *env) base = env;
  }
  if (base.empty()) base = info.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();

  // Final outputs and the digest each must carry.
  struct Output {
    fs::path path;
    std::optional<std::string> pin;
  };
  std::vector<Output> outputs;
  if (info.extracted.empty()) {
    for (const auto& f : info.downloads) outputs.push_back({dir / f.name, f.sha256});
  } else {
    for (const auto& m : info.extracted) outputs.push_back({dir / m.member, std::nullopt});
  }

  bool complete = true;
  for (const auto& o : outputs) {
    if (!fs::exists(o.path)) {
      complete = false;
      continue;
    }
    if (auto expected = ExpectedDigest(o.path, o.pin)) Verify(o.path, *expected);
  }
  std::vector<fs::path> paths;
  for (const auto& o : outputs) paths.push_back(o.path);
  if (complete) return paths;

  std::map<std::string, std::string> fetched;
  for (const auto& f : info.downloads) {
    const fs::path target = dir / f.name;
    std::string bytes;
    if (fs::exists(target)) {
      if (auto expected = ExpectedDigest(target, f.sha256)) Verify(target, *expected);
      bytes = ReadAll(target);
    } else {
      const std::string url = f.url.find("://") != std::string::npos ? f.url : base + "/" + f.url;
      bytes = HttpGet(url, options.timeout_seconds);
      const std::string digest = Sha256Hex(bytes);
      if (f.sha256 && digest != *f.sha256) {
        throw Error(ErrorCode::kDigestMismatch,
                    "download of " + f.name + " has sha256 " + digest + ", expected " + *f.sha256);
      }
      WriteAtomically(target, bytes);
      if (!f.sha256) WriteAtomically(Sidecar(target), digest + "  " + f.name + "\n");
    }
    fetched[f.name] = std::move(bytes);
  }
  for (const auto& m : info.extracted) {
    const fs::path target = dir / m.member;
    if (fs::exists(target)) continue;
    const std::string bytes = ExtractZipMember(fetched.at(m.archive), m.member);
    WriteAtomically(target, bytes);
    WriteAtomically(Sidecar(target), Sha256Hex(bytes) + "  " + m.member + "\n");
  }
  return paths;
}

PreparedData PrepareDataset(std::string_view id, const PrepareOptions& options) {
  const DatasetInfo& info = FindDataset(id);
  const fs::path data_dir = options.data_dir.empty() ? DefaultDataDir() : options.data_dir;
  const fs::path schema_path = options.schema_path.empty() ? DefaultSchemaPath(info) : options.schema_path;
  const fs::path data_path = data_dir / info.id / info.data_file;
  if (!fs::exists(data_path)) {
    throw Error(ErrorCode::kIoError, data_path.string() + " not found (run: petbench fetch " + info.id + ")");
  }
  PreparedData out{LoadSchemaFile(schema_path), DataTable(), DataTable()};
  CsvOptions csv;
  csv.dialect = info.dialect;
  csv.header = info.header;
  csv.schema = &out.schema;
  DataTable table = LoadCsv(data_path, csv);
  out.raw_rows = table.rows();
  std::vector<std::string> names;
  for (const auto& c : out.schema.columns()) names.push_back(c.name);
  table = table.SelectColumns(names);
  const auto complete = table.RowsWithoutMissing();
  out.dropped_missing = table.rows() - complete.size();
  table = table.SelectRows(complete);
  if (options.max_rows && *options.max_rows < table.rows()) {
    std::vector<std::size_t> order(table.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(options.split.seed ^ 0x5bd1e995ULL);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(*options.max_rows);
    std::sort(order.begin(), order.end());
    table = table.SelectRows(order);
  }
  auto [train, test] = Split(table, options.split);
  out.train = std::move(train);
  out.test = std::move(test);
  return out;
}

}  // namespace petbench
