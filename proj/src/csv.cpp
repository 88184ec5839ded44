#include "curemix/csv.hpp"

#include "curemix/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace curemix {

namespace {

std::string
trim(std::string s)
{
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string>
split_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ','))
    out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

bool
is_missing(const std::string& cell)
{
  return cell.empty() || cell == "NA";
}

double
parse_number(const std::string& cell, std::size_t line, const std::string& column)
{
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw InvalidInput("non-numeric cell '" + cell + "' at line " + std::to_string(line) +
                       ", column '" + column + "'");
  return v;
}

} // namespace

std::size_t
CsvTable::column(const std::string& name) const
{
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw InvalidInput("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable
parse_csv(const std::string& text)
{
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (first) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
      table.header = split_line(line);
      first = false;
      continue;
    }
    if (trim(line).empty())
      continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size())
      throw InvalidInput("line " + std::to_string(line_no) + " has " +
                         std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  if (first)
    throw InvalidInput("empty CSV input");
  return table;
}

std::string
read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable
read_csv(const std::filesystem::path& path)
{
  return parse_csv(read_file(path));
}

std::vector<std::string>
split_list(const std::string& text, char sep)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

TableDataset
dataset_from_table(const CsvTable& table,
                   const std::string& time_column,
                   const std::string& status_column,
                   const std::vector<std::string>& incidence_columns,
                   const std::vector<std::string>& latency_columns)
{
  const std::size_t tc = table.column(time_column);
  const std::size_t sc = table.column(status_column);
  std::vector<std::size_t> xc, zc;
  for (const auto& c : incidence_columns)
    xc.push_back(table.column(c));
  for (const auto& c : latency_columns)
    zc.push_back(table.column(c));

  std::vector<std::size_t> referenced{ tc, sc };
  referenced.insert(referenced.end(), xc.begin(), xc.end());
  referenced.insert(referenced.end(), zc.begin(), zc.end());

  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (std::none_of(referenced.begin(), referenced.end(),
                     [&](std::size_t c) { return is_missing(row[c]); }))
      kept.push_back(r);
  }
  if (kept.empty())
    throw InvalidInput("no complete rows in input");

  const auto n = static_cast<Eigen::Index>(kept.size());
  Eigen::VectorXd time(n);
  Eigen::VectorXi event(n);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(xc.size()));
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(zc.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = kept[static_cast<std::size_t>(i)];
    const auto& row = table.rows[r];
    const std::size_t line = r + 2; // header is line 1
    time(i) = parse_number(row[tc], line, time_column);
    const double status = parse_number(row[sc], line, status_column);
    if (status != 0.0 && status != 1.0)
      throw InvalidInput("status '" + row[sc] + "' at line " + std::to_string(line) +
                         ", column '" + status_column + "' is not 0 or 1");
    event(i) = static_cast<int>(status);
    for (std::size_t j = 0; j < xc.size(); ++j)
      x(i, static_cast<Eigen::Index>(j)) = parse_number(row[xc[j]], line, incidence_columns[j]);
    for (std::size_t j = 0; j < zc.size(); ++j)
      z(i, static_cast<Eigen::Index>(j)) = parse_number(row[zc[j]], line, latency_columns[j]);
  }
  return { Dataset(std::move(time), std::move(event), std::move(x), std::move(z)),
           table.rows.size() - kept.size() };
}

void
write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw InvalidInput("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out)
      throw InvalidInput("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

} // namespace curemix
