#include "phia/trajectory_csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(errc::kInvalidArgument,
                fmt::format("csv row {}: cannot parse '{}'", row, s));
  }
  return v;
}

void append(std::string& line, double v) {
  fmt::format_to(std::back_inserter(line), ",{:.17g}", v);
}

}  // namespace

std::string csv_header(int n, int m) {
  std::string h = "t";
  for (int i = 1; i <= n; ++i) h += fmt::format(",q{}", i);
  for (int i = 1; i <= n; ++i) h += fmt::format(",p{}", i);
  for (int i = 1; i <= m; ++i) h += fmt::format(",zeta{}", i);
  for (int i = 1; i <= m; ++i) h += fmt::format(",u{}", i);
  for (int i = 1; i <= m; ++i) h += fmt::format(",d{}", i);
  return h + ",H_d,W";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << csv_header(tr.n, tr.m) << '\n';
  std::string line;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    line = fmt::format("{:.17g}", tr.times[i]);
    for (const Vector* v : {&tr.q[i], &tr.p[i], &tr.zeta[i], &tr.u[i], &tr.d[i]}) {
      for (Eigen::Index k = 0; k < v->size(); ++k) append(line, (*v)(k));
    }
    append(line, tr.shaped_energy[i]);
    append(line, tr.lyapunov[i]);
    line += '\n';
    os << line;
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(errc::kInvalidArgument, fmt::format("cannot open '{}'", path));
  write_trajectory_csv(os, tr);
  if (!os) throw Error(errc::kInvalidArgument, fmt::format("write to '{}' failed", path));
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(errc::kInvalidArgument, "csv: missing header");
  const auto cols = split(line);
  int n = 0;
  int m = 0;
  for (auto c : cols) {
    if (c.starts_with('q')) ++n;
    if (c.starts_with('u')) ++m;
  }
  Trajectory tr;
  tr.n = n;
  tr.m = m;
  if (line != csv_header(n, m)) {
    throw Error(errc::kInvalidArgument, fmt::format("csv: unexpected header '{}'", line));
  }
  const std::size_t width = cols.size();
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != width) {
      throw Error(errc::kInvalidArgument,
                  fmt::format("csv row {}: expected {} fields, got {}", row, width,
                              f.size()));
    }
    std::size_t k = 0;
    auto take = [&](int count) {
      Vector v(count);
      for (int i = 0; i < count; ++i) v(i) = parse_double(f[k++], row);
      return v;
    };
    tr.times.push_back(parse_double(f[k++], row));
    tr.q.push_back(take(n));
    tr.p.push_back(take(n));
    tr.zeta.push_back(take(m));
    tr.u.push_back(take(m));
    tr.d.push_back(take(m));
    tr.shaped_energy.push_back(parse_double(f[k++], row));
    tr.lyapunov.push_back(parse_double(f[k++], row));
  }
  return tr;
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(errc::kInvalidArgument, fmt::format("cannot open '{}'", path));
  return read_trajectory_csv(is);
}

std::string gnuplot_script(const std::string& csv_path, int n, int m) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 't [s]'\n"
     << "set multiplot layout 3,1\n";
  os << "plot";
  for (int i = 0; i < n; ++i) {
    os << fmt::format("{} '{}' using 1:{} with lines", i ? "," : "", csv_path, 2 + i);
  }
  os << "\nplot";
  for (int i = 0; i < m; ++i) {
    os << fmt::format("{} '{}' using 1:{} with lines", i ? "," : "", csv_path,
                      2 + 2 * n + i);
  }
  os << "\nplot";
  for (int i = 0; i < m; ++i) {
    const int u_col = 2 + 2 * n + m + i;
    os << fmt::format("{} '{}' using 1:(${}-${}) with lines title 'u{}-d{}'",
                      i ? "," : "", csv_path, u_col, u_col + m, i + 1, i + 1);
  }
  os << "\nunset multiplot\n";
  return os.str();
}

}  // namespace phia
