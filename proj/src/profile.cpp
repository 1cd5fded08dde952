#include "burgers_net/profile.hpp"

#include "burgers_net/error.hpp"

#include <algorithm>
#include <cmath>

namespace bnet {

StepFunction::StepFunction(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (values_.empty() || breaks_.size() != values_.size() + 1)
        throw Error(Errc::InvalidArgument, "step function needs one more break than values");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!(breaks_[k + 1] > breaks_[k])) throw Error(Errc::InvalidArgument, "step breaks must increase");
        if (!std::isfinite(values_[k])) throw Error(Errc::InvalidArgument, "step value is not finite");
    }
    prefix_.assign(breaks_.size(), 0.0);
    for (std::size_t k = 0; k < values_.size(); ++k)
        prefix_[k + 1] = prefix_[k] + values_[k] * (breaks_[k + 1] - breaks_[k]);
}

StepFunction StepFunction::constant(double length, double value) { return StepFunction({0.0, length}, {value}); }

StepFunction StepFunction::from_segments(double length, const std::vector<Segment>& segments) {
    std::vector<double> cuts{0.0, length};
    for (const auto& s : segments) {
        if (!(s.x1 > s.x0)) throw Error(Errc::InvalidArgument, "segment end must exceed its start");
        cuts.push_back(std::clamp(s.x0, 0.0, length));
        cuts.push_back(std::clamp(s.x1, 0.0, length));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<double> values(cuts.size() - 1, 0.0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        for (const auto& s : segments)
            if (mid >= s.x0 && mid < s.x1) values[k] = s.value;  // later segments win
    }
    // Merge equal neighbours.
    std::vector<double> b{cuts.front()}, v;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!v.empty() && v.back() == values[k]) {
            b.back() = cuts[k + 1];
        } else {
            v.push_back(values[k]);
            b.push_back(cuts[k + 1]);
        }
    }
    return StepFunction(std::move(b), std::move(v));
}

double StepFunction::operator()(double x) const {
    if (x <= breaks_.front()) return values_.front();
    if (x >= breaks_.back()) return values_.back();
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StepFunction::integral(double y) const {
    if (y <= breaks_.front()) return 0.0;
    if (y >= breaks_.back()) return prefix_.back();
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), y);
    std::size_t k = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return prefix_[k] + values_[k] * (y - breaks_[k]);
}

double StepFunction::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double StepFunction::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

Eigen::VectorXd StepFunction::cell_averages(int cells) const {
    Eigen::VectorXd out(cells);
    const double a = start(), h = (end() - start()) / cells;
    for (int i = 0; i < cells; ++i) {
        double x0 = a + i * h, x1 = a + (i + 1) * h;
        out[i] = (integral(x1) - integral(x0)) / h;
    }
    return out;
}

Eigen::VectorXd cell_centres(double length, int cells) {
    Eigen::VectorXd x(cells);
    const double h = length / cells;
    for (int i = 0; i < cells; ++i) x[i] = (i + 0.5) * h;
    return x;
}

}  // namespace bnet
