#include "sysid/hankel.hpp"

#include <Eigen/SVD>

#include <stdexcept>

namespace sysid {

namespace {

void check_half_size(Index n) {
    if (n < 1) throw std::invalid_argument("Hankel half-size n must be >= 1");
    if (n > kMaxHalfSize) throw std::invalid_argument("Hankel half-size n exceeds the desk-scale cap of 512");
}

} // namespace

ImpulseResponse::ImpulseResponse(Index n, Index p, Index m) : n_(n), p_(p), m_(m) {
    check_half_size(n);
    if (p < 1 || m < 1) throw std::invalid_argument("channel counts must be >= 1");
    data_ = Eigen::VectorXd::Zero((2 * n - 1) * p * m);
}

Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
ImpulseResponse::block(Index j) {
    return {data_.data() + j * m_ * p_, m_, p_};
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
ImpulseResponse::block(Index j) const {
    return {data_.data() + j * m_ * p_, m_, p_};
}

ImpulseResponse ImpulseResponse::scalar(const Eigen::VectorXd& values) {
    if (values.size() % 2 == 0) throw std::invalid_argument("scalar impulse response needs odd length 2n-1");
    ImpulseResponse h((values.size() + 1) / 2, 1, 1);
    h.data_ = values;
    return h;
}

ImpulseResponse ImpulseResponse::operator-(const ImpulseResponse& rhs) const {
    if (!same_geometry(rhs)) throw std::invalid_argument("geometry mismatch");
    ImpulseResponse out = *this;
    out.data_ -= rhs.data_;
    return out;
}

ImpulseResponse ImpulseResponse::operator+(const ImpulseResponse& rhs) const {
    if (!same_geometry(rhs)) throw std::invalid_argument("geometry mismatch");
    ImpulseResponse out = *this;
    out.data_ += rhs.data_;
    return out;
}

ImpulseResponse ImpulseResponse::operator*(double s) const {
    ImpulseResponse out = *this;
    out.data_ *= s;
    return out;
}

ShapingWeights shaping_weights(Index n) {
    check_half_size(n);
    ShapingWeights w;
    w.n = n;
    w.k.resize(2 * n - 1);
    for (Index j = 1; j <= 2 * n - 1; ++j)
        w.k[j - 1] = j <= n ? std::sqrt(double(j)) : std::sqrt(double(2 * n - j));
    return w;
}

ShapingWeights ShapingWeights::identity(Index n) {
    check_half_size(n);
    ShapingWeights w;
    w.n = n;
    w.k = Eigen::VectorXd::Ones(2 * n - 1);
    return w;
}

Eigen::VectorXi antidiagonal_multiplicity(Index n) {
    check_half_size(n);
    Eigen::VectorXi c(2 * n - 1);
    for (Index j = 1; j <= 2 * n - 1; ++j) c[j - 1] = int(std::min(j, 2 * n - j));
    return c;
}

HankelMatrix hankel_map(const ImpulseResponse& h) {
    const Index n = h.n(), p = h.p(), m = h.m();
    HankelMatrix H{n, p, m, Eigen::MatrixXd(m * n, p * n)};
    for (Index i = 0; i < n; ++i)
        for (Index l = 0; l < n; ++l) H.data.block(i * m, l * p, m, p) = h.block(i + l);
    return H;
}

ImpulseResponse hankel_adjoint(const Eigen::MatrixXd& M, Index n, Index p, Index m) {
    check_half_size(n);
    if (M.rows() != m * n || M.cols() != p * n)
        throw std::invalid_argument("hankel_adjoint: matrix shape does not match geometry");
    ImpulseResponse out(n, p, m);
    for (Index i = 0; i < n; ++i)
        for (Index l = 0; l < n; ++l) out.block(i + l) += M.block(i * m, l * p, m, p);
    return out;
}

HankelMatrix weighted_hankel_map(const ImpulseResponse& beta, const ShapingWeights& k) {
    if (beta.num_blocks() != k.k.size())
        throw std::invalid_argument("weighted_hankel_map: weight length mismatch");
    ImpulseResponse unweighted = beta;
    for (Index j = 0; j < beta.num_blocks(); ++j) unweighted.block(j) /= k.k[j];
    return hankel_map(unweighted);
}

ImpulseResponse weighted_hankel_adjoint(const Eigen::MatrixXd& M, const ShapingWeights& k,
                                        Index p, Index m) {
    ImpulseResponse sums = hankel_adjoint(M, k.n, p, m);
    for (Index j = 0; j < sums.num_blocks(); ++j) sums.block(j) /= k.k[j];
    return sums;
}

double block_dot(const ImpulseResponse& a, const ImpulseResponse& b) {
    if (!a.same_geometry(b)) throw std::invalid_argument("geometry mismatch");
    return a.flat().dot(b.flat());
}

Index numerical_rank(const Eigen::MatrixXd& M, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    Index r = 0;
    while (r < s.size() && s[r] / s[0] > rel_tol) ++r;
    return r;
}

} // namespace sysid
