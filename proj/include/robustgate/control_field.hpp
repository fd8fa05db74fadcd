#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace robustgate {

/// Piecewise-constant control command vector: value theta_k holds on the
/// interval ((k-1)h, kh] with h = horizon / N.
struct ControlField {
    Eigen::VectorXd values;
    double horizon = 0.0;

    ControlField() = default;
    ControlField(Eigen::VectorXd v, double t) : values(std::move(v)), horizon(t) {}

    int size() const { return static_cast<int>(values.size()); }
    double step() const { return horizon / static_cast<double>(values.size()); }

    void validate() const {
        if (values.size() < 1) throw std::invalid_argument("ControlField: N must be >= 1");
        if (!(horizon > 0.0)) throw std::invalid_argument("ControlField: horizon must be > 0");
        if (!values.allFinite()) throw std::invalid_argument("ControlField: values must be finite");
    }
};

/// How command values turn into the physical field c(t).
///
/// - IdealPiecewiseConstant: c(t) = theta_k on each command interval.
/// - FirstOrderLag: output of a rate-nu first-order stage driven by the
///   command staircase, c' = nu (theta_k - c), c(0) = 0.
/// - PulseShaper: c(t) = A0(t) sum_i [sin(w_i t) theta_{2i} + cos(w_i t) theta_{2i+1}],
///   i.e. amplitude/phase pairs through fixed envelope and frequencies.
struct ShapeGenerator {
    enum class Kind { IdealPiecewiseConstant, FirstOrderLag, PulseShaper };

    Kind kind = Kind::IdealPiecewiseConstant;
    double lag_rate = 0.0;                  // nu, FirstOrderLag only
    int fine_grid_factor = 16;              // p, sub-steps per command interval
    std::vector<double> envelope;           // A0 samples, uniform on [0, T], PulseShaper
    std::vector<double> frequencies;        // w_i, PulseShaper

    static ShapeGenerator ideal(int p = 1) {
        ShapeGenerator g;
        g.kind = Kind::IdealPiecewiseConstant;
        g.fine_grid_factor = p;
        return g;
    }

    static ShapeGenerator first_order_lag(double nu, int p = 16) {
        ShapeGenerator g;
        g.kind = Kind::FirstOrderLag;
        g.lag_rate = nu;
        g.fine_grid_factor = p;
        return g;
    }

    static ShapeGenerator pulse_shaper(std::vector<double> envelope,
                                       std::vector<double> frequencies, int p = 16) {
        ShapeGenerator g;
        g.kind = Kind::PulseShaper;
        g.envelope = std::move(envelope);
        g.frequencies = std::move(frequencies);
        g.fine_grid_factor = p;
        return g;
    }

    void validate() const {
        if (fine_grid_factor < 1)
            throw std::invalid_argument("ShapeGenerator: fine-grid factor must be >= 1");
        if (kind == Kind::FirstOrderLag && !(lag_rate > 0.0))
            throw std::invalid_argument("ShapeGenerator: lag rate must be > 0");
        if (kind == Kind::PulseShaper) {
            if (envelope.size() < 2)
                throw std::invalid_argument("ShapeGenerator: envelope needs >= 2 samples");
            if (frequencies.empty())
                throw std::invalid_argument("ShapeGenerator: no frequencies given");
        }
    }
};

namespace detail {

/// Linear interpolation of uniformly spaced samples over [0, T].
inline double interp_envelope(const std::vector<double>& samples, double horizon, double t) {
    const auto n = samples.size();
    const double x = std::clamp(t / horizon, 0.0, 1.0) * static_cast<double>(n - 1);
    const auto i0 = static_cast<std::size_t>(std::min(x, static_cast<double>(n - 2)));
    const double f = x - static_cast<double>(i0);
    return samples[i0] * (1.0 - f) + samples[i0 + 1] * f;
}

/// Shape function s_k(t) of the first-order-lag generator: zero before the
/// k-th command interval, 1 - e^{-nu (t - t_{k-1})} inside it, and an
/// exponential tail (1 - e^{-nu h}) e^{-nu (t - t_k)} afterwards.
inline double lag_shape(int k, double t, double h, double nu) {
    const double t_start = static_cast<double>(k) * h;
    const double t_end = t_start + h;
    if (t <= t_start) return 0.0;
    if (t <= t_end) return 1.0 - std::exp(-nu * (t - t_start));
    return (1.0 - std::exp(-nu * h)) * std::exp(-nu * (t - t_end));
}

}  // namespace detail

/// Evaluates the physical field at the midpoints of M uniform fine
/// intervals over [0, horizon].
///
/// For the ideal generator M must be a multiple of N and the result is the
/// command vector with each value repeated p = M/N times.
inline Eigen::VectorXd sample_field(const ControlField& field, const ShapeGenerator& gen,
                                    int fine_count) {
    field.validate();
    gen.validate();
    const int n = field.size();
    if (fine_count < 1) throw std::invalid_argument("sample_field: M must be >= 1");

    Eigen::VectorXd c(fine_count);
    const double h_fine = field.horizon / static_cast<double>(fine_count);

    switch (gen.kind) {
        case ShapeGenerator::Kind::IdealPiecewiseConstant: {
            if (fine_count % n != 0)
                throw std::invalid_argument("sample_field: M must be a multiple of N for the ideal generator");
            const int p = fine_count / n;
            for (int m = 0; m < fine_count; ++m) c(m) = field.values(m / p);
            return c;
        }
        case ShapeGenerator::Kind::FirstOrderLag: {
            if (fine_count < n)
                throw std::invalid_argument("sample_field: M must be >= N");
            const double h = field.step();
            for (int m = 0; m < fine_count; ++m) {
                const double t = (static_cast<double>(m) + 0.5) * h_fine;
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += detail::lag_shape(k, t, h, gen.lag_rate) * field.values(k);
                c(m) = acc;
            }
            return c;
        }
        case ShapeGenerator::Kind::PulseShaper: {
            const auto num_freq = gen.frequencies.size();
            if (static_cast<std::size_t>(n) != 2 * num_freq)
                throw std::invalid_argument("sample_field: pulse shaper needs N == 2 * #frequencies");
            if (fine_count < n)
                throw std::invalid_argument("sample_field: M must be >= N");
            for (int m = 0; m < fine_count; ++m) {
                const double t = (static_cast<double>(m) + 0.5) * h_fine;
                const double a0 = detail::interp_envelope(gen.envelope, field.horizon, t);
                double acc = 0.0;
                for (std::size_t i = 0; i < num_freq; ++i) {
                    const double w = gen.frequencies[i];
                    acc += std::sin(w * t) * field.values(2 * static_cast<int>(i)) +
                           std::cos(w * t) * field.values(2 * static_cast<int>(i) + 1);
                }
                c(m) = a0 * acc;
            }
            return c;
        }
    }
    throw std::logic_error("sample_field: unreachable");
}

/// Gram matrix B = integral of s(t) s(t)^T dt of the generator's shape
/// functions, so that the fluence of a shaped field is theta^T B theta.
/// Composite Simpson per command interval (panels aligned with the kinks).
inline Eigen::MatrixXd shape_fluence_matrix(int n, double horizon, const ShapeGenerator& gen,
                                            int panels_per_interval = 32) {
    gen.validate();
    if (n < 1 || !(horizon > 0.0))
        throw std::invalid_argument("shape_fluence_matrix: invalid field dimensions");
    if (panels_per_interval % 2 != 0) ++panels_per_interval;

    const auto shape_at = [&](double t) {
        Eigen::VectorXd s(n);
        switch (gen.kind) {
            case ShapeGenerator::Kind::IdealPiecewiseConstant: {
                const double h = horizon / n;
                for (int k = 0; k < n; ++k) {
                    const double lo = k * h, hi = lo + h;
                    s(k) = (t > lo && t <= hi) ? 1.0 : 0.0;
                }
                break;
            }
            case ShapeGenerator::Kind::FirstOrderLag: {
                const double h = horizon / n;
                for (int k = 0; k < n; ++k) s(k) = detail::lag_shape(k, t, h, gen.lag_rate);
                break;
            }
            case ShapeGenerator::Kind::PulseShaper: {
                const double a0 = detail::interp_envelope(gen.envelope, horizon, t);
                const auto num_freq = gen.frequencies.size();
                if (static_cast<std::size_t>(n) != 2 * num_freq)
                    throw std::invalid_argument("shape_fluence_matrix: N != 2 * #frequencies");
                for (std::size_t i = 0; i < num_freq; ++i) {
                    s(2 * static_cast<int>(i)) = a0 * std::sin(gen.frequencies[i] * t);
                    s(2 * static_cast<int>(i) + 1) = a0 * std::cos(gen.frequencies[i] * t);
                }
                break;
            }
        }
        return s;
    };

    // For ideal shapes the indicators are discontinuous at interval edges;
    // quadrature would smear them. The exact answer is h * I.
    if (gen.kind == ShapeGenerator::Kind::IdealPiecewiseConstant)
        return (horizon / n) * Eigen::MatrixXd::Identity(n, n);

    // Intervals of the command staircase bound every kink of s(t).
    const int segments = (gen.kind == ShapeGenerator::Kind::FirstOrderLag) ? n : 1;
    const double seg_len = horizon / segments;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (int seg = 0; seg < segments; ++seg) {
        const double lo = seg * seg_len;
        const double dt = seg_len / panels_per_interval;
        for (int j = 0; j <= panels_per_interval; ++j) {
            const double t = lo + j * dt;
            double wgt = (j == 0 || j == panels_per_interval) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            const Eigen::VectorXd s = shape_at(t);
            b.noalias() += (wgt * dt / 3.0) * (s * s.transpose());
        }
    }
    return 0.5 * (b + b.transpose());
}

}  // namespace robustgate
