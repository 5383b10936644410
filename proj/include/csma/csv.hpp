#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace csma {

/// Shortest round-trippable text form of a double.
std::string format_real(double v);

/// A parsed comma-separated file. Lines starting with '#' are comments; those
/// of the form `# key=value key=value` are collected into `comments`.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> comments;

  std::size_t column(const std::string& name) const;
  const std::string& comment_value(const std::string& key) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_fields(const std::string& line, char sep = ',');

}  // namespace csma
