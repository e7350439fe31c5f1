#include "sfl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sfl/errors.hpp"

namespace sfl::io {

namespace fs = std::filesystem;

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

void write_text(const fs::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::IoError, "cannot open " + p.string() + " for writing");
  os << text;
  if (!os) throw Error(Errc::IoError, "write to " + p.string() + " failed");
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

void write_profile_csv(const fs::path& p, const GridFn& f) {
  std::ostringstream os;
  sfl::write_profile_csv(os, f);
  write_text(p, os.str());
}

void write_dat(const fs::path& p, const Curve& c) {
  std::string out = "#";
  for (const auto& name : c.columns) out += " " + name;
  out += "\n";
  char buf[32];
  for (const auto& row : c.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.17g", i ? " " : "", row[i]);
      out += buf;
    }
    out += "\n";
  }
  write_text(p, out);
}

Curve profile_curve(const GridFn& f, const std::string& value_name) {
  Curve c{{"x", value_name}, {}};
  const Grid& g = f.grid();
  c.rows.reserve(g.cells() + 1);
  for (int j = 0; j <= g.cells(); ++j) c.rows.push_back({g.node(j), f[j]});
  return c;
}

}  // namespace sfl::io
