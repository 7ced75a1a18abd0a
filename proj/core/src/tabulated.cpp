#include "robust_affine/tabulated.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robust_affine/error.hpp"

namespace robust_affine {

TabulatedFunction::TabulatedFunction(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.empty() || xs_.size() != ys_.size()) {
    throw Error(Error::Kind::InvalidArgument, "tabulated function: need matching non-empty columns");
  }
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
      throw Error(Error::Kind::InvalidArgument, "tabulated function: non-finite entry");
    }
    if (i > 0 && !(xs_[i] > xs_[i - 1])) {
      throw Error(Error::Kind::InvalidArgument,
                  "tabulated function: first column must be strictly increasing");
    }
  }
}

double TabulatedFunction::operator()(double x) const noexcept {
  if (xs_.size() == 1) return ys_[0];
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t k;
  if (it == xs_.begin()) {
    k = 0;
  } else if (it == xs_.end()) {
    k = xs_.size() - 2;
  } else {
    k = static_cast<std::size_t>(it - xs_.begin()) - 1;
  }
  if (x == xs_[k]) return ys_[k];
  const double w = (x - xs_[k]) / (xs_[k + 1] - xs_[k]);
  return ys_[k] + w * (ys_[k + 1] - ys_[k]);
}

TabulatedFunction read_tabulated(std::istream& in, const std::string& source) {
  std::vector<double> xs, ys;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double x = 0.0, y = 0.0;
    std::string extra;
    if (!(row >> x >> y) || (row >> extra)) {
      throw Error(Error::Kind::InvalidArgument,
                  source + ":" + std::to_string(line_no) + ": expected two numeric columns");
    }
    if (!xs.empty() && !(x > xs.back())) {
      throw Error(Error::Kind::InvalidArgument,
                  source + ":" + std::to_string(line_no) + ": first column not strictly increasing");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.empty()) throw Error(Error::Kind::InvalidArgument, source + ": no data rows");
  return TabulatedFunction(std::move(xs), std::move(ys));
}

}  // namespace robust_affine
