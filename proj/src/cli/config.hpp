#pragma once

#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "surfdyn/cli.hpp"
#include "surfdyn/linalg.hpp"
#include "surfdyn/maps.hpp"

namespace surfdyn::cli {

// Reads one table of the config, records every key it looks at and builds
// the resolved copy (defaults filled) as it goes.
class Node {
 public:
  Node(const json& j, std::string path);

  double number(const std::string& key, double def);
  std::optional<double> maybe_number(const std::string& key);
  long integer(const std::string& key, long def);
  std::string string(const std::string& key, const std::string& def);
  Vec2 point(const std::string& key, Vec2 def);
  Region region(const std::string& key, const Region& def);
  std::optional<std::vector<double>> maybe_numbers(const std::string& key);
  std::optional<std::vector<Vec2>> maybe_points(const std::string& key);

  bool present(const std::string& key) const;
  Node child(const std::string& key);
  void put(const std::string& key, Node& child);
  void null(const std::string& key) { echo_[key] = nullptr; }
  // Raises ConfigError for keys nobody asked for.
  void finish();

  void positive(double v, const std::string& key) const;
  void at_least(long v, long lo, const std::string& key) const;
  void one_of(const std::string& v, std::initializer_list<const char*> options,
              const std::string& key) const;

  std::string field(const std::string& key) const;
  const json& source() const { return src_; }
  json& echo() { return echo_; }

 private:
  const json* find(const std::string& key);
  static std::vector<double> numbers(const json& v, const std::string& path);

  json src_;
  json echo_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string block_name(const std::string& command);

}  // namespace surfdyn::cli
