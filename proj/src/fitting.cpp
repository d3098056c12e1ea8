#include "whlab/fitting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace whlab {

LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w) {
    if (x.size() != y.size() || x.size() != w.size())
        throw std::invalid_argument("linear fit: length mismatch");
    double W = 0, xb = 0, yb = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (w[i] < 0) throw std::invalid_argument("linear fit: negative weight");
        W += w[i];
        xb += w[i] * x[i];
        yb += w[i] * y[i];
    }
    if (W <= 0) throw std::invalid_argument("linear fit: zero total weight");
    xb /= W;
    yb /= W;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        sxy += w[i] * (x[i] - xb) * (y[i] - yb);
        syy += w[i] * (y[i] - yb) * (y[i] - yb);
    }
    if (sxx <= 0) throw std::invalid_argument("linear fit: degenerate abscissa");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = yb - f.slope * xb;
    double ss_res = syy - f.slope * sxy;
    f.weighted_r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

std::vector<double> unwrap_phases(std::vector<double> phases) {
    const double two_pi = 2.0 * std::acos(-1.0);
    for (std::size_t i = 1; i < phases.size(); ++i) {
        double d = phases[i] - phases[i - 1];
        phases[i] -= two_pi * std::round(d / two_pi);
    }
    return phases;
}

namespace {

double ssr_of(const std::vector<double>& x, const std::vector<double>& y, double a, double b,
              double c) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = a * std::pow(x[i], b) + c - y[i];
        s += r * r;
    }
    return s;
}

// Least-squares (a, c) for fixed exponent; returns SSR.
double solve_affine(const std::vector<double>& x, const std::vector<double>& y, double b,
                    double& a, double& c) {
    double suu = 0, su = 0, suy = 0, sy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double u = std::pow(x[i], b);
        suu += u * u;
        su += u;
        suy += u * y[i];
        sy += y[i];
    }
    double det = suu * n - su * su;
    if (std::abs(det) < 1e-300) {
        a = 0;
        c = sy / n;
    } else {
        a = (suy * n - su * sy) / det;
        c = (suu * sy - su * suy) / det;
    }
    return ssr_of(x, y, a, b, c);
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("power law: length mismatch");
    if (x.size() < 4) throw std::invalid_argument("power law: need at least 4 points");
    for (double v : x)
        if (v <= 0) throw std::invalid_argument("power law: abscissa must be positive");

    double a = 0, b = 0.7, c = 0, best = std::numeric_limits<double>::infinity();
    for (double bb = 0.05; bb <= 2.5; bb += 0.025) {
        double aa, cc;
        double s = solve_affine(x, y, bb, aa, cc);
        if (s < best) {
            best = s;
            a = aa;
            b = bb;
            c = cc;
        }
    }

    PowerLawFit fit;
    double lambda = 1e-3, ssr = best;
    Eigen::Matrix3d jtj_final = Eigen::Matrix3d::Zero();
    for (int it = 0; it < 500; ++it) {
        fit.iterations = it + 1;
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < x.size(); ++i) {
            double xb = std::pow(x[i], b);
            double r = a * xb + c - y[i];
            Eigen::Vector3d g(xb, a * xb * std::log(x[i]), 1.0);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        jtj_final = jtj;
        bool stepped = false;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::Matrix3d damped = jtj;
            for (int d = 0; d < 3; ++d) damped(d, d) += lambda * (jtj(d, d) > 0 ? jtj(d, d) : 1.0);
            Eigen::Vector3d delta = damped.ldlt().solve(-jtr);
            double s = ssr_of(x, y, a + delta[0], b + delta[1], c + delta[2]);
            if (s < ssr) {
                a += delta[0];
                b += delta[1];
                c += delta[2];
                double gain = ssr - s;
                ssr = s;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (gain < 1e-15 * (1.0 + ssr)) fit.converged = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
        if (!stepped) {
            fit.converged = true;
            break;
        }
        if (fit.converged) break;
    }

    fit.a = a;
    fit.b = b;
    fit.c = c;
    fit.rms = std::sqrt(ssr / double(x.size()));
    double dof = double(x.size()) - 3.0;
    if (dof > 0) {
        Eigen::Matrix3d cov = jtj_final.inverse() * (ssr / dof);
        fit.b_stderr = std::sqrt(std::max(cov(1, 1), 0.0));
    }
    return fit;
}

}  // namespace whlab
