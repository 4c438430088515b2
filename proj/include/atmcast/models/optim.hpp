#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace atmcast {

class Adam {
public:
    explicit Adam(double lr, std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0)
    {
    }

    void step(std::vector<double>& theta, const std::vector<double>& grad)
    {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, double(t_));
        const double c2 = 1.0 - std::pow(beta2_, double(t_));
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            theta[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        }
    }

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

/// Classical momentum: v <- mu*v - lr*g; theta <- theta + v.
class Momentum {
public:
    Momentum(double lr, double mu, std::size_t n) : lr_(lr), mu_(mu), vel_(n, 0.0) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad)
    {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            vel_[i] = mu_ * vel_[i] - lr_ * grad[i];
            theta[i] += vel_[i];
        }
    }

private:
    double lr_, mu_;
    std::vector<double> vel_;
};

} // namespace atmcast
