#pragma once

#include "curemix/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace curemix {

//! Comma-separated table with a header row. Cells are trimmed and a pair
//! of surrounding double quotes is removed; embedded commas are not supported.
struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  //! Throws InvalidInput naming the column when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

struct TableDataset
{
  Dataset data;
  //! Rows skipped because a referenced cell was empty or "NA".
  std::size_t dropped_rows = 0;
};

TableDataset dataset_from_table(const CsvTable& table,
                                const std::string& time_column,
                                const std::string& status_column,
                                const std::vector<std::string>& incidence_columns,
                                const std::vector<std::string>& latency_columns);

//! Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

} // namespace curemix
