#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lplasma/types.hpp"

namespace lplasma {

using Complex = std::complex<double>;

inline Complex to_complex(Point2 p) { return {p.x, p.y}; }

/// Real gradient of log|g| for holomorphic g, given the ratio g'/g: it is conj(g'/g).
inline Point2 log_modulus_gradient(Complex dlog) { return {dlog.real(), -dlog.imag()}; }

/// log|after / before| for nonzero before, computed from the increment so that
/// nearby arguments do not lose precision: log|1 + d| with d = (after - before) / before.
inline double log_modulus_ratio(Complex before, Complex increment) {
    const Complex d = increment / before;
    return 0.5 * std::log1p(2.0 * d.real() + std::norm(d));
}

/// Holomorphic symmetric prefactor F. Implementations expose
/// W(Z) = -2 log|F(sqrt(N-1) Z)| and its gradient in the plasma-scaled frame.
/// All polynomial factors are evaluated as sums of logs of factored terms.
class CorrelationFactor {
public:
    virtual ~CorrelationFactor() = default;

    /// W(Z); +inf at zeros of F.
    [[nodiscard]] virtual double w_value(const Configuration& cfg, std::size_t n) const = 0;

    /// grad_{z_j} W for each j. Throws SingularConfiguration at zeros of F.
    [[nodiscard]] virtual std::vector<Point2> w_gradient(const Configuration& cfg, std::size_t n) const = 0;

    /// W(Z with z_index replaced by moved) - W(Z). Overridden with O(N) versions.
    [[nodiscard]] virtual double w_delta(const Configuration& cfg, std::size_t n, std::size_t index,
                                         Point2 moved) const {
        Configuration next = cfg;
        next[index] = moved;
        return w_value(next, n) - w_value(cfg, n);
    }

    /// W(b) - W(a) for two configurations of equal length, evaluated without
    /// cancellation between the two totals where the factor structure allows.
    [[nodiscard]] virtual double w_difference(const Configuration& a, const Configuration& b, std::size_t n) const {
        const double wb = w_value(b, n);
        if (wb == kInf) return kInf;
        return wb - w_value(a, n);
    }

    [[nodiscard]] virtual bool is_trivial() const { return false; }
    [[nodiscard]] virtual std::string describe() const = 0;

protected:
    static double scale(std::size_t n) { return n >= 1 ? std::sqrt(static_cast<double>(n - 1)) : 0.0; }
};

using FactorPtr = std::shared_ptr<const CorrelationFactor>;

/// F == 1.
class TrivialFactor final : public CorrelationFactor {
public:
    double w_value(const Configuration&, std::size_t) const override { return 0.0; }
    std::vector<Point2> w_gradient(const Configuration& cfg, std::size_t) const override {
        return std::vector<Point2>(cfg.size());
    }
    double w_delta(const Configuration&, std::size_t, std::size_t, Point2) const override { return 0.0; }
    double w_difference(const Configuration&, const Configuration&, std::size_t) const override { return 0.0; }
    bool is_trivial() const override { return true; }
    std::string describe() const override { return "trivial"; }
};

/// F = prod_j f1(z_j) with f1 a polynomial, given either by its roots
/// (f1(u) = lead * prod_k (u - r_k)) or by coefficients c_0 + c_1 u + ... .
class OneBodyPolynomial final : public CorrelationFactor {
public:
    static OneBodyPolynomial from_roots(std::vector<Complex> roots, double lead = 1.0) {
        if (!(lead != 0.0) || !std::isfinite(lead)) throw InvalidArgument("one-body factor: lead must be nonzero");
        OneBodyPolynomial f;
        f.roots_ = std::move(roots);
        f.lead_ = lead;
        f.by_roots_ = true;
        return f;
    }

    /// Coefficients in ascending order; evaluated by Horner's rule, so keep the degree moderate.
    static OneBodyPolynomial from_coefficients(std::vector<Complex> coefficients) {
        while (!coefficients.empty() && coefficients.back() == Complex{}) coefficients.pop_back();
        if (coefficients.empty()) throw InvalidArgument("one-body factor: zero polynomial");
        OneBodyPolynomial f;
        f.coefficients_ = std::move(coefficients);
        f.by_roots_ = false;
        return f;
    }

    double w_value(const Configuration& cfg, std::size_t n) const override {
        const double s = scale(n);
        double sum = 0.0;
        for (const auto& z : cfg) {
            const double lm = log_modulus(s * to_complex(z));
            if (lm == -kInf) return kInf;
            sum += lm;
        }
        return -2.0 * sum;
    }

    std::vector<Point2> w_gradient(const Configuration& cfg, std::size_t n) const override {
        const double s = scale(n);
        std::vector<Point2> grad(cfg.size());
        for (std::size_t j = 0; j < cfg.size(); ++j) {
            const Complex ratio = s * dlog(s * to_complex(cfg[j]));
            grad[j] = -2.0 * log_modulus_gradient(ratio);
        }
        return grad;
    }

    double w_delta(const Configuration& cfg, std::size_t n, std::size_t index, Point2 moved) const override {
        const double s = scale(n);
        const double after = log_modulus(s * to_complex(moved));
        if (after == -kInf) return kInf;
        return -2.0 * (after - log_modulus(s * to_complex(cfg[index])));
    }

    double w_difference(const Configuration& a, const Configuration& b, std::size_t n) const override {
        if (!by_roots_) return CorrelationFactor::w_difference(a, b, n);
        const double s = scale(n);
        double diff = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const Complex ua = s * to_complex(a[j]);
            const Complex step = s * to_complex(b[j] - a[j]);
            for (const auto& r : roots_) {
                if (ua + step - r == Complex{}) return kInf;
                diff += log_modulus_ratio(ua - r, step);
            }
        }
        return -2.0 * diff;
    }

    std::string describe() const override {
        std::ostringstream os;
        os.precision(17);
        if (by_roots_) {
            os << "one_body(lead=" << lead_ << ",roots=[";
            for (std::size_t k = 0; k < roots_.size(); ++k)
                os << (k ? ";" : "") << roots_[k].real() << "," << roots_[k].imag();
        } else {
            os << "one_body(coefficients=[";
            for (std::size_t k = 0; k < coefficients_.size(); ++k)
                os << (k ? ";" : "") << coefficients_[k].real() << "," << coefficients_[k].imag();
        }
        os << "])";
        return os.str();
    }

    [[nodiscard]] const std::vector<Complex>& roots() const { return roots_; }

private:
    OneBodyPolynomial() = default;

    [[nodiscard]] double log_modulus(Complex u) const {
        if (by_roots_) {
            double sum = std::log(std::abs(lead_));
            for (const auto& r : roots_) {
                const double a = std::abs(u - r);
                if (a == 0.0) return -kInf;
                sum += std::log(a);
            }
            return sum;
        }
        const double a = std::abs(horner(u).first);
        return a == 0.0 ? -kInf : std::log(a);
    }

    /// f1'(u) / f1(u).
    [[nodiscard]] Complex dlog(Complex u) const {
        if (by_roots_) {
            Complex sum{};
            for (const auto& r : roots_) {
                const Complex d = u - r;
                if (d == Complex{}) throw SingularConfiguration("one-body factor vanishes at a particle");
                sum += 1.0 / d;
            }
            return sum;
        }
        const auto [p, dp] = horner(u);
        if (p == Complex{}) throw SingularConfiguration("one-body factor vanishes at a particle");
        return dp / p;
    }

    [[nodiscard]] std::pair<Complex, Complex> horner(Complex u) const {
        Complex p{}, dp{};
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
            dp = dp * u + p;
            p = p * u + *it;
        }
        return {p, dp};
    }

    std::vector<Complex> roots_;
    std::vector<Complex> coefficients_;
    double lead_ = 1.0;
    bool by_roots_ = true;
};

/// F = prod_{i<j} f2(z_i, z_j) with
/// f2(u, v) = (u - v)^p * prod_k (u + v - a_k) * prod_m (u v - b_m).
/// |f2| is symmetric in (u, v); p = 1 with no extra roots is the Laughlin
/// exponent shift l -> l + 1.
class PairPolynomial final : public CorrelationFactor {
public:
    explicit PairPolynomial(unsigned difference_power = 1, std::vector<Complex> sum_roots = {},
                            std::vector<Complex> product_roots = {})
        : power_(difference_power), sum_roots_(std::move(sum_roots)), product_roots_(std::move(product_roots)) {}

    double w_value(const Configuration& cfg, std::size_t n) const override {
        const double s = scale(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < cfg.size(); ++i)
            for (std::size_t j = i + 1; j < cfg.size(); ++j) {
                const double lm = pair_log_modulus(s, to_complex(cfg[i]), to_complex(cfg[j]));
                if (lm == -kInf) return kInf;
                sum += lm;
            }
        return -2.0 * sum;
    }

    std::vector<Point2> w_gradient(const Configuration& cfg, std::size_t n) const override {
        const double s = scale(n);
        std::vector<Point2> grad(cfg.size());
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            Complex total{};
            const Complex zi = to_complex(cfg[i]);
            for (std::size_t j = 0; j < cfg.size(); ++j)
                if (j != i) total += pair_dlog(s, zi, to_complex(cfg[j]));
            grad[i] = -2.0 * log_modulus_gradient(total);
        }
        return grad;
    }

    double w_delta(const Configuration& cfg, std::size_t n, std::size_t index, Point2 moved) const override {
        const double s = scale(n);
        const Complex before = to_complex(cfg[index]);
        const Complex after = to_complex(moved);
        double diff = 0.0;
        for (std::size_t j = 0; j < cfg.size(); ++j) {
            if (j == index) continue;
            const Complex zj = to_complex(cfg[j]);
            const double a = pair_log_modulus(s, after, zj);
            if (a == -kInf) return kInf;
            diff += a - pair_log_modulus(s, before, zj);
        }
        return -2.0 * diff;
    }

    double w_difference(const Configuration& a, const Configuration& b, std::size_t n) const override {
        const double s = scale(n);
        double diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j) {
                const Complex ui = to_complex(a[i]), uj = to_complex(a[j]);
                const Complex di = to_complex(b[i] - a[i]), dj = to_complex(b[j] - a[j]);
                if (power_ > 0) {
                    const Complex before = ui - uj;
                    if (before + di - dj == Complex{}) return kInf;
                    diff += power_ * log_modulus_ratio(before, di - dj);
                }
                for (const auto& r : sum_roots_) {
                    const Complex before = s * (ui + uj) - r;
                    const Complex inc = s * (di + dj);
                    if (before + inc == Complex{}) return kInf;
                    diff += log_modulus_ratio(before, inc);
                }
                for (const auto& r : product_roots_) {
                    const Complex before = s * s * ui * uj - r;
                    const Complex inc = s * s * ((ui + di) * dj + di * uj);
                    if (before + inc == Complex{}) return kInf;
                    diff += log_modulus_ratio(before, inc);
                }
            }
        return -2.0 * diff;
    }

    std::string describe() const override {
        std::ostringstream os;
        os.precision(17);
        os << "pair(power=" << power_ << ",sum_roots=[";
        for (std::size_t k = 0; k < sum_roots_.size(); ++k)
            os << (k ? ";" : "") << sum_roots_[k].real() << "," << sum_roots_[k].imag();
        os << "],product_roots=[";
        for (std::size_t k = 0; k < product_roots_.size(); ++k)
            os << (k ? ";" : "") << product_roots_[k].real() << "," << product_roots_[k].imag();
        os << "])";
        return os.str();
    }

    [[nodiscard]] unsigned difference_power() const { return power_; }
    [[nodiscard]] bool is_pure_difference() const { return sum_roots_.empty() && product_roots_.empty(); }

private:
    [[nodiscard]] double pair_log_modulus(double s, Complex u, Complex v) const {
        double sum = 0.0;
        if (power_ > 0) {
            const double d = std::abs(s * (u - v));
            if (d == 0.0) return -kInf;
            sum += power_ * std::log(d);
        }
        for (const auto& a : sum_roots_) {
            const double d = std::abs(s * (u + v) - a);
            if (d == 0.0) return -kInf;
            sum += std::log(d);
        }
        for (const auto& b : product_roots_) {
            const double d = std::abs(s * s * u * v - b);
            if (d == 0.0) return -kInf;
            sum += std::log(d);
        }
        return sum;
    }

    /// d/du log f2(s u, s v) at fixed v.
    [[nodiscard]] Complex pair_dlog(double s, Complex u, Complex v) const {
        Complex sum{};
        if (power_ > 0) {
            const Complex d = u - v;
            if (d == Complex{}) throw SingularConfiguration("pair factor vanishes: coincident points");
            sum += static_cast<double>(power_) / d;
        }
        for (const auto& a : sum_roots_) {
            const Complex d = s * (u + v) - a;
            if (d == Complex{}) throw SingularConfiguration("pair factor vanishes");
            sum += s / d;
        }
        for (const auto& b : product_roots_) {
            const Complex d = s * s * u * v - b;
            if (d == Complex{}) throw SingularConfiguration("pair factor vanishes");
            sum += s * s * v / d;
        }
        return sum;
    }

    unsigned power_;
    std::vector<Complex> sum_roots_;
    std::vector<Complex> product_roots_;
};

/// prod_j f1(z_j) * prod_{i<j} f2(z_i, z_j).
class CompositeFactor final : public CorrelationFactor {
public:
    CompositeFactor(OneBodyPolynomial one_body, PairPolynomial pair)
        : one_body_(std::move(one_body)), pair_(std::move(pair)) {}

    double w_value(const Configuration& cfg, std::size_t n) const override {
        const double a = one_body_.w_value(cfg, n);
        if (a == kInf) return kInf;
        const double b = pair_.w_value(cfg, n);
        if (b == kInf) return kInf;
        return a + b;
    }

    std::vector<Point2> w_gradient(const Configuration& cfg, std::size_t n) const override {
        auto g = one_body_.w_gradient(cfg, n);
        const auto h = pair_.w_gradient(cfg, n);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += h[j];
        return g;
    }

    double w_delta(const Configuration& cfg, std::size_t n, std::size_t index, Point2 moved) const override {
        const double a = one_body_.w_delta(cfg, n, index, moved);
        if (a == kInf) return kInf;
        const double b = pair_.w_delta(cfg, n, index, moved);
        if (b == kInf) return kInf;
        return a + b;
    }

    double w_difference(const Configuration& a, const Configuration& b, std::size_t n) const override {
        const double x = one_body_.w_difference(a, b, n);
        if (x == kInf) return kInf;
        const double y = pair_.w_difference(a, b, n);
        if (y == kInf) return kInf;
        return x + y;
    }

    std::string describe() const override { return "composite(" + one_body_.describe() + "," + pair_.describe() + ")"; }

private:
    OneBodyPolynomial one_body_;
    PairPolynomial pair_;
};

inline FactorPtr trivial_factor() { return std::make_shared<const TrivialFactor>(); }

/// F = prod_{i<j} (z_i - z_j).
inline FactorPtr laughlin_pair_factor() { return std::make_shared<const PairPolynomial>(1); }

/// F = prod_j z_j.
inline FactorPtr origin_one_body_factor() {
    return std::make_shared<const OneBodyPolynomial>(OneBodyPolynomial::from_roots({Complex{0.0, 0.0}}));
}

} // namespace lplasma
