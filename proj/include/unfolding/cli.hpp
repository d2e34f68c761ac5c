#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "unfolding/dynamics.hpp"
#include "unfolding/series.hpp"

namespace unfolding::cli {

using nlohmann::json;

struct Truncation {
  int nx = 24;
  int ny = 12;
};

struct DynamicsControls {
  double rho = 0.0;  // 0: 2 rho_eps, or 1 at eps = 0
  ThetaProfile theta;
  double rtol = 1e-10;
  double atol = 1e-13;
};

struct FieldSpec {
  int k = 1;
  CVec eps;
  cplx mu = 0.0;
  int tau = 0;
  std::vector<RMonomial> R;
  std::optional<CVec> U;
  Truncation truncation;
  DynamicsControls dynamics;

  void validate() const;
  UnfoldingField field() const;
  double rho() const;
};

// Complex numbers are [re, im]; a bare number is read as real.
json to_json(cplx z);
cplx complex_from_json(const json& j);
json to_json(const CVec& v);
CVec cvec_from_json(const json& j);

// Throws ArgumentError on missing or malformed fields.
FieldSpec field_spec_from_json(const json& j);
json to_json(const FieldSpec& s);

// Sorted keys, two-space indent, trailing newline.
std::string dump_stable(const json& j);

// Minimal SVG writer over a square window of the complex plane.
class SvgWriter {
 public:
  SvgWriter(double half_width, int pixels = 600);
  void polyline(const Curve& c, const std::string& stroke, double width = 1.0);
  void circle(cplx center, double radius_px, const std::string& fill);
  std::string str() const;
  int polyline_count() const { return polylines_; }

 private:
  double half_width_;
  int pixels_;
  int polylines_ = 0;
  std::vector<std::string> items_;
  std::string point(cplx z) const;
};

struct Options {
  int jobs = 1;
  unsigned seed = 0;
  std::optional<double> tol;  // UNFOLDING_LAB_TOL
};

// UNFOLDING_LAB_TOL when set and positive.
std::optional<double> tolerance_from_env();

struct CommandOutput {
  json result;
  std::optional<std::string> svg;
};

const std::vector<std::string>& command_names();
// Runs one subcommand on a parsed spec document.
CommandOutput run_command(const std::string& name, const json& doc, const Options& opt);

// 2 argument, 3 numeric, 4 degenerate, 1 anything else.
int exit_code(const std::exception& e);

// Entry point of the unfolding-lab tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unfolding::cli
