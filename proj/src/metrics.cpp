#include "sysid/metrics.hpp"

#include <unsupported/Eigen/FFT>

#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace sysid {

namespace {

double spectral_norm(const Eigen::MatrixXd& M) {
    if (std::min(M.rows(), M.cols()) <= 16)
        return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
    return Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

} // namespace

double ir_error(const ImpulseResponse& h_hat, const ImpulseResponse& h) {
    if (!h_hat.same_geometry(h)) throw std::invalid_argument("geometry mismatch");
    return (h_hat - h).norm();
}

double hankel_spectral_error(const ImpulseResponse& h_hat, const ImpulseResponse& h) {
    if (!h_hat.same_geometry(h)) throw std::invalid_argument("geometry mismatch");
    return spectral_norm(hankel_map(h_hat - h).data);
}

SandwichCheck check_norm_sandwich(const ImpulseResponse& d) {
    SandwichCheck c;
    const double fro = d.norm();
    c.lower = fro / std::sqrt(2.0);
    c.spectral = spectral_norm(hankel_map(d).data);
    c.upper = std::sqrt(double(d.n())) * fro;
    // exact zero passes with equalities
    const double slack = 1e-12 * (1.0 + fro);
    c.ok = c.lower <= c.spectral + slack && c.spectral <= c.upper + slack;
    return c;
}

double ls_rate(double sigma_z, Index m, Index n, Index p, Index T) {
    if (T < 1) throw std::domain_error("T must be >= 1");
    const double lg = std::max(std::log(double(n) * double(p)), 1.0);
    return sigma_z * std::sqrt(double(m) * double(n) * double(p) / double(T)) * lg;
}

RateValue hnn_rate(double sigma, Index R, Index n, Index p, Index T) {
    if (R < 1 || n < 1 || p < 1 || T < 1) throw std::domain_error("arguments must be positive");
    const double logn = std::log(double(n));
    const double rbar = std::min(double(R) * double(R) * logn * logn, double(n));
    RateValue rate;
    if (double(T) >= rbar) {
        rate.regime = "large-T";
        rate.value = sigma * std::sqrt(double(n) * double(p) / double(T)) * logn;
    } else {
        rate.regime = double(T) >= double(R) ? "small-T" : "below-theory";
        rate.value = sigma * std::sqrt(double(R) * double(n) * double(p) / double(T)) * logn;
    }
    return rate;
}

double circulant_spectral_bound(const ImpulseResponse& d) {
    if (d.p() != 1 || d.m() != 1)
        throw std::invalid_argument("circulant bound is defined for the scalar case");
    const Index L = d.num_blocks();
    std::vector<double> series(L);
    for (Index j = 0; j < L; ++j) series[j] = d.at(j, 0, 0);
    std::vector<std::complex<double>> spectrum;
    Eigen::FFT<double> fft;
    fft.fwd(spectrum, series);
    double best = 0.0;
    for (const auto& v : spectrum) best = std::max(best, std::abs(v));
    return best;
}

ErrorReport error_report(const ImpulseResponse& h_hat, const ImpulseResponse& h,
                         double predicted_rate) {
    ErrorReport rep;
    rep.ir_error = ir_error(h_hat, h);
    rep.hankel_spectral_error = hankel_spectral_error(h_hat, h);
    rep.sandwich_ok = check_norm_sandwich(h_hat - h).ok;
    rep.predicted_rate = predicted_rate;
    return rep;
}

} // namespace sysid
