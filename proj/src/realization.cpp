#include "sysid/realization.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <limits>
#include <stdexcept>

namespace sysid {

Eigen::VectorXd hankel_spectrum(const ImpulseResponse& h) {
    const Eigen::MatrixXd H = hankel_map(h).data;
    if (std::min(H.rows(), H.cols()) <= 16)
        return Eigen::JacobiSVD<Eigen::MatrixXd>(H).singularValues();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(H);
    if (svd.info() != Eigen::Success) throw std::runtime_error("SVD did not converge");
    return svd.singularValues();
}

OrderDetection detect_order(const Eigen::VectorXd& sv, double gap_ratio_threshold) {
    if (sv.size() == 0) throw std::domain_error("empty spectrum");
    OrderDetection det;
    if (sv[0] <= 0.0) return det; // zero spectrum: order 0, not confident

    Index significant = 0;
    while (significant < sv.size() && sv[significant] / sv[0] > 1e-6) ++significant;

    Index best = 0;
    double best_ratio = 0.0;
    for (Index i = 0; i + 1 <= sv.size() - 1 && i < significant; ++i) {
        const double ratio = sv[i + 1] > 0.0 ? sv[i] / sv[i + 1]
                                             : std::numeric_limits<double>::infinity();
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = i + 1;
        }
    }
    det.best_gap_ratio = best_ratio;
    if (best_ratio >= gap_ratio_threshold) {
        det.order = best;
        det.confident = true;
    } else {
        det.order = significant;
        det.confident = false;
    }
    return det;
}

RealizationResult ho_kalman(const ImpulseResponse& h, Index R) {
    const Index n = h.n(), p = h.p(), m = h.m();
    if (R < 1 || R > n - 1) throw std::invalid_argument("need 1 <= R <= n-1");

    // Block (i, l) of the factored Hankel is h_{i+l}, i.e. stored block
    // i+l+1 (0-based); the feedthrough block is left out.
    const Index nb = n - 1;
    Eigen::MatrixXd H(m * nb, p * nb);
    for (Index i = 0; i < nb; ++i)
        for (Index l = 0; l < nb; ++l) H.block(i * m, l * p, m, p) = h.block(i + l + 1);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw std::runtime_error("SVD did not converge");

    RealizationResult out;
    out.order_used = R;
    out.singular_values = svd.singularValues();

    const Eigen::VectorXd sqrt_s = svd.singularValues().head(R).cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd O = svd.matrixU().leftCols(R) * sqrt_s.asDiagonal();
    const Eigen::MatrixXd Q = sqrt_s.asDiagonal() * svd.matrixV().leftCols(R).transpose();

    out.sys.C = O.topRows(m);
    out.sys.B = Q.leftCols(p);
    out.sys.D = h.block(0);
    if (nb >= 2) {
        const Eigen::MatrixXd O_up = O.topRows(m * (nb - 1));
        const Eigen::MatrixXd O_down = O.bottomRows(m * (nb - 1));
        // rank-aware solve; degenerate spectra (zero response, R above the
        // numerical rank) fall back to the minimum-norm shift
        out.sys.A = O_up.completeOrthogonalDecomposition().solve(O_down);
    } else {
        out.sys.A = Eigen::MatrixXd::Zero(R, R); // too short a window to move the state
    }

    out.reconstruction_error = (h - impulse_response(out.sys, n)).norm();
    return out;
}

} // namespace sysid
