#pragma once

#include <cmath>
#include <stdexcept>

namespace occ {

/// C2 approximation of x -> max(0, x), exact outside (0, 1/(2 gamma)).
/// The default instance is the quintic polynomial splice; alternative
/// approximations can override value/deriv/deriv2 and are re-checked by
/// the same property suite.
class SmoothedMax {
public:
    explicit SmoothedMax(double gamma, double c1 = 7.0, double c2 = 1.0,
                         double second_deriv_constant = 8.0)
        : gamma_(gamma), c1_(c1), c2_(c2), M_(second_deriv_constant) {
        if (!(gamma > 0.0)) throw std::invalid_argument("SmoothedMax: gamma must be positive");
    }
    virtual ~SmoothedMax() = default;

    double gamma() const { return gamma_; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double second_deriv_constant() const { return M_; }

    // Evaluation is in Horner form in t = gamma*x; all branch
    // coefficients are exact in binary.
    virtual double value(double x) const {
        const double t = gamma_ * x;
        if (t <= 0.0) return 0.0;
        if (t >= 0.5) return x;
        return t * t * t * (24.0 + t * (-64.0 + 48.0 * t)) / gamma_;
    }

    /// In [0, 2] by assumption; the polynomial instance peaks near 1.51.
    virtual double deriv(double x) const {
        const double t = gamma_ * x;
        if (t <= 0.0) return 0.0;
        if (t >= 0.5) return 1.0;
        return t * t * (72.0 + t * (-256.0 + 240.0 * t));
    }

    /// |deriv2| <= M * gamma.
    virtual double deriv2(double x) const {
        const double t = gamma_ * x;
        if (t <= 0.0 || t >= 0.5) return 0.0;
        return gamma_ * t * (144.0 + t * (-768.0 + 960.0 * t));
    }

    struct Penalty {
        double r;      // -gamma * max_gamma(psi - u) <= 0
        double dr_du;  // gamma * max_gamma'(psi - u) in [0, 2 gamma]
    };

    Penalty penalty(double psi, double u_value) const {
        const double x = psi - u_value;
        return {-gamma_ * value(x), gamma_ * deriv(x)};
    }

private:
    double gamma_;
    double c1_, c2_, M_;
};

}  // namespace occ
