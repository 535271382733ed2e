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

#ifndef PETBENCH_DATASETS_H_
#define PETBENCH_DATASETS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "petbench/anonymity.h"
#include "petbench/data_core.h"

namespace petbench {

struct RemoteFile {
  std::string name;  // file name under the dataset directory
  std::string url;   // relative to the dataset's base URL unless absolute
  // Pinned lowercase hex SHA-256. Without a pin the first download is
  // trusted and its digest kept in a "<name>.sha256" sidecar.
  std::optional<std::string> sha256;
};

struct ArchiveMember {
  std::string archive;  // a RemoteFile name
  std::string member;   // base name inside the archive, nested zips searched
};

struct DatasetInfo {
  std::string id;
  std::string data_file;
  CsvDialect dialect = CsvDialect::kComma;
  bool header = false;
  std::string schema_file;     // under <resource root>/config
  std::string hierarchy_file;  // under <resource root>/config
  std::string base_url;
  std::vector<RemoteFile> downloads;
  std::vector<ArchiveMember> extracted;
};

const std::vector<DatasetInfo>& KnownDatasets();
// Throws kConfig for unknown ids.
const DatasetInfo& FindDataset(std::string_view id);

// PETBENCH_HOME if set, else the source tree this library was built from.
std::filesystem::path ResourceRoot();
std::filesystem::path DefaultDataDir();
std::filesystem::path DefaultSchemaPath(const DatasetInfo& info);
std::filesystem::path DefaultHierarchyPath(const DatasetInfo& info);

struct FetchOptions {
  // Replaces DatasetInfo::base_url; PETBENCH_MIRROR is used when empty.
  std::string base_url;
  int timeout_seconds = 60;
};

// Downloads into dest/<id>/ and verifies digests. Files already present and
// valid are left alone without touching the network. Throws kDigestMismatch
// and kNetworkError; neither leaves partial files behind.
std::vector<std::filesystem::path> FetchDataset(std::string_view id, const std::filesystem::path& dest,
                                                const FetchOptions& options = {});

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

// Bytes of the first entry whose base name is `member`, looking inside
// nested .zip entries too. Throws kParseError.
std::string ExtractZipMember(std::string_view zip, std::string_view member);

struct PreparedData {
  AttributeSchema schema;
  DataTable train;
  DataTable test;
  std::size_t raw_rows = 0;
  std::size_t dropped_missing = 0;
};

struct PrepareOptions {
  std::filesystem::path data_dir;    // DefaultDataDir() when empty
  std::filesystem::path schema_path; // DefaultSchemaPath() when empty
  SplitSpec split;
  // Keep at most this many complete rows, chosen by a seeded shuffle.
  std::optional<std::size_t> max_rows;
};

// Loads the dataset CSV, keeps schema columns, drops rows with missing
// values and splits. Throws kIoError when the data file is absent.
PreparedData PrepareDataset(std::string_view id, const PrepareOptions& options);

}  // namespace petbench

#endif  // PETBENCH_DATASETS_H_
