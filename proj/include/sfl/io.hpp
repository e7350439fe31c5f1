#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfl/grid.hpp"

namespace sfl::io {

using Json = nlohmann::ordered_json;

// Finite doubles become numbers, others the strings "inf", "-inf", "nan".
Json number(double v);

void write_text(const std::filesystem::path& p, const std::string& text);
void write_json(const std::filesystem::path& p, const Json& j);
// Grid CSV schema: header "x,value", one row per node.
void write_profile_csv(const std::filesystem::path& p, const GridFn& f);

// Whitespace-separated columns with a "# name name ..." header, for gnuplot.
struct Curve {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_dat(const std::filesystem::path& p, const Curve& c);
Curve profile_curve(const GridFn& f, const std::string& value_name);

}  // namespace sfl::io
