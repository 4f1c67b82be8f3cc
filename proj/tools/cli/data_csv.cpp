#include "data_csv.hpp"

#include <bdsurvey/error.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace bdsurvey::cli {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  for (std::size_t pos = 0;;) {
    const auto comma = line.find(',', pos);
    std::string_view f = line.substr(pos, comma - pos);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) return out;
    pos = comma + 1;
  }
}

double to_double(std::string_view f, const std::string& where) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || end != f.data() + f.size() || !std::isfinite(v))
    throw ConfigError(where + ": '" + std::string(f) + "' is not a finite number");
  return v;
}

int to_int(std::string_view f, const std::string& where) {
  int v = 0;
  const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || end != f.data() + f.size())
    throw ConfigError(where + ": '" + std::string(f) + "' is not an integer");
  return v;
}

std::uint8_t to_flag(std::string_view f, const std::string& where) {
  if (f == "0") return 0;
  if (f == "1") return 1;
  throw ConfigError(where + ": '" + std::string(f) + "' must be 0 or 1");
}

}  // namespace

Population DataTable::observations() const {
  Population pop(rows());
  const auto labels = strata();
  for (std::size_t i = 0; i < rows(); ++i) {
    pop[i].y.resize(static_cast<Eigen::Index>(1 + x.size()));
    pop[i].y(0) = y[i];
    for (std::size_t j = 0; j < x.size(); ++j) pop[i].y(static_cast<Eigen::Index>(j + 1)) = x[j][i];
    pop[i].stratum = labels[i];
    pop[i].delta = delta && (*delta)[i];
  }
  return pop;
}

std::vector<int> DataTable::strata() const {
  return stratum ? *stratum : std::vector<int>(rows(), 0);
}

DataTable parse_data_csv(std::string_view text, std::string_view source) {
  const std::string src(source);
  DataTable t;
  std::vector<std::string> header;
  std::map<std::string, std::size_t> xcols;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string where = src + ":" + std::to_string(line_no);
    if (header.empty()) {
      for (auto f : split(line)) {
        std::string name(f);
        const bool known = name == "y" || name == "stratum" || name == "delta" || name == "alpha" ||
                           name == "pi";
        const bool regressor = name.size() > 1 && name[0] == 'x' &&
                               name.find_first_not_of("0123456789", 1) == std::string::npos &&
                               name[1] != '0';
        if (!known && !regressor) throw ConfigError(where + ": unknown column '" + name + "'");
        for (const auto& h : header)
          if (h == name) throw ConfigError(where + ": duplicate column '" + name + "'");
        if (regressor) xcols[name] = 0;
        header.push_back(std::move(name));
      }
      bool has_y = false;
      for (const auto& h : header) has_y = has_y || h == "y";
      if (!has_y) throw ConfigError(where + ": missing required column 'y'");
      for (std::size_t j = 1; j <= xcols.size(); ++j)
        if (!xcols.count("x" + std::to_string(j)))
          throw ConfigError(where + ": regressor columns must be x1..x" + std::to_string(xcols.size()));
      t.x.resize(xcols.size());
      for (const auto& h : header) {
        if (h == "stratum") t.stratum.emplace();
        if (h == "delta") t.delta.emplace();
        if (h == "alpha") t.alpha.emplace();
        if (h == "pi") t.pi.emplace();
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw ConfigError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& h = header[c];
      const auto f = fields[c];
      if (h == "y") {
        t.y.push_back(to_double(f, where));
      } else if (h == "stratum") {
        t.stratum->push_back(to_int(f, where));
      } else if (h == "delta") {
        t.delta->push_back(to_flag(f, where));
      } else if (h == "alpha") {
        t.alpha->push_back(to_flag(f, where));
      } else if (h == "pi") {
        const double p = to_double(f, where);
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError(where + ": pi must lie in (0, 1]");
        t.pi->push_back(p);
      } else {
        t.x[std::stoul(h.substr(1)) - 1].push_back(to_double(f, where));
      }
    }
  }
  if (header.empty()) throw ConfigError(src + ": empty file");
  if (t.rows() == 0) throw ConfigError(src + ": no data rows");
  return t;
}

DataTable read_data_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_data_csv(buf.str(), path.string());
}

}  // namespace bdsurvey::cli
