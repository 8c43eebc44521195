#pragma once

#include <iosfwd>
#include <string>

#include "phia/scenario.hpp"

namespace phia {

// t,q1..qn,p1..pn,zeta1..zetam,u1..um,d1..dm,H_d,W
std::string csv_header(int n, int m);

// 17 significant digits, LF line endings.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_trajectory_csv(const std::string& path, const Trajectory& tr);

// Infers n and m from the header. Throws "invalid-argument" on malformed
// input.
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::string& path);

// A gnuplot script plotting q, zeta and u - d from the given CSV file.
std::string gnuplot_script(const std::string& csv_path, int n, int m);

}  // namespace phia
