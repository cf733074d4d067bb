#pragma once

#include <cmath>
#include <numbers>

#include "nmc/common.hpp"

namespace nmc {

// C^1 time perturbation u on [0,1] with u(0) = u(1) = 0 and closed-form
// derivative. Two parametric families:
//   Sine(k):  u(t) = A sin(k pi t)
//   Bump(m):  u(t) = A t(1-t) t^m
class Perturbation {
public:
    enum class Kind { Sine, Bump };

    static Perturbation sine(int k, double amplitude = 1.0)
    {
        if (k < 1) throw DomainError("Perturbation::sine: k must be >= 1");
        return Perturbation(Kind::Sine, k, amplitude);
    }

    static Perturbation bump(int m, double amplitude = 1.0)
    {
        if (m < 0) throw DomainError("Perturbation::bump: m must be >= 0");
        return Perturbation(Kind::Bump, m, amplitude);
    }

    Kind kind() const { return kind_; }
    int order() const { return order_; }
    double amplitude() const { return amp_; }

    double operator()(double t) const
    {
        switch (kind_) {
        case Kind::Sine:
            return amp_ * std::sin(order_ * std::numbers::pi * t);
        case Kind::Bump:
        default:
            return amp_ * t * (1.0 - t) * std::pow(t, order_);
        }
    }

    double derivative(double t) const
    {
        switch (kind_) {
        case Kind::Sine:
            return amp_ * order_ * std::numbers::pi *
                   std::cos(order_ * std::numbers::pi * t);
        case Kind::Bump:
        default:
            // d/dt [t^{m+1} - t^{m+2}]
            return amp_ * ((order_ + 1) * std::pow(t, order_) -
                           (order_ + 2) * std::pow(t, order_ + 1));
        }
    }

    // Upper bound on sup |u'|.
    double derivative_bound() const
    {
        switch (kind_) {
        case Kind::Sine:
            return std::abs(amp_) * order_ * std::numbers::pi;
        case Kind::Bump:
        default:
            return std::abs(amp_) * (2.0 * order_ + 3.0);
        }
    }

    std::string name() const
    {
        std::string base = (kind_ == Kind::Sine) ? "Sine(" : "Bump(";
        base += std::to_string(order_) + ")";
        if (amp_ != 1.0) base += "*" + std::to_string(amp_);
        return base;
    }

private:
    Perturbation(Kind kind, int order, double amp)
        : kind_(kind), order_(order), amp_(amp) {}

    Kind kind_;
    int order_;
    double amp_;
};

} // namespace nmc
