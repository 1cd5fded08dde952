#pragma once

#include <Eigen/Core>

#include <vector>

namespace bnet {

struct Segment {
    double x0 = 0.0;
    double x1 = 0.0;
    double value = 0.0;

    bool operator==(const Segment&) const = default;
};

// Piecewise-constant function on [breaks.front(), breaks.back()]; piece k is
// [breaks[k], breaks[k+1]).
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> breaks, std::vector<double> values);

    static StepFunction constant(double length, double value);
    // Segments outside [0, length] are clipped; uncovered parts are zero.
    static StepFunction from_segments(double length, const std::vector<Segment>& segments);

    double start() const { return breaks_.front(); }
    double end() const { return breaks_.back(); }
    int pieces() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(double x) const;
    // Integral from start() to y, for y in [start(), end()].
    double integral(double y) const;
    double min_value() const;
    double max_value() const;
    // Value next to the right end.
    double left_limit_at_end() const { return values_.back(); }

    Eigen::VectorXd cell_averages(int cells) const;

private:
    std::vector<double> breaks_{0.0, 1.0};
    std::vector<double> values_{0.0};
    std::vector<double> prefix_{0.0, 0.0};
};

// Samples of u on one edge at one time. x holds cell centres of a uniform
// grid of width cell_width.
struct EdgeProfile {
    int edge = 0;
    double t = 0.0;
    double cell_width = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd u;
};

struct Snapshot {
    double t = 0.0;
    std::vector<EdgeProfile> edges;
};

Eigen::VectorXd cell_centres(double length, int cells);

}  // namespace bnet
