#ifndef SYSID_HANKEL_HPP
#define SYSID_HANKEL_HPP

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace sysid {

using Index = Eigen::Index;

/// Hankel half-sizes above this are rejected; the dense SVD path is meant
/// for desk-scale problems only.
inline constexpr Index kMaxHalfSize = 512;

/// Block vector of the first 2n-1 Markov-parameter blocks of an LTI system,
/// h_t for t = 1..2n-1, each block m x p. Block index 0 holds h_1; the
/// feedthrough term occupies h_1 in the sampling convention used throughout
/// (the regressor row [u_{2n-1}, ..., u_1] pairs position j with h_j, so h_1
/// multiplies the instantaneous input).
///
/// The same layout doubles as the generic block vector of the weighted
/// operators (the rescaled variable beta = K h lives in an ImpulseResponse
/// too). Storage is one flat buffer, block-major with row-major blocks:
/// entry (j, r, c) sits at ((j*m + r)*p + c). All modules share this layout.
class ImpulseResponse {
  public:
    ImpulseResponse() : n_(0), p_(0), m_(0) {}
    ImpulseResponse(Index n, Index p, Index m);

    Index n() const { return n_; }
    Index p() const { return p_; }
    Index m() const { return m_; }
    Index num_blocks() const { return 2 * n_ - 1; }
    Index dim() const { return data_.size(); }

    /// Block j (0-based), an m x p view. Block j holds h_{j+1}.
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> block(Index j);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    block(Index j) const;

    double& at(Index j, Index r, Index c) { return data_[(j * m_ + r) * p_ + c]; }
    double at(Index j, Index r, Index c) const { return data_[(j * m_ + r) * p_ + c]; }

    Eigen::VectorXd& flat() { return data_; }
    const Eigen::VectorXd& flat() const { return data_; }

    double norm() const { return data_.norm(); }
    bool same_geometry(const ImpulseResponse& other) const {
        return n_ == other.n_ && p_ == other.p_ && m_ == other.m_;
    }

    /// Scalar (p = m = 1) constructor from a plain sequence h_1..h_{2n-1}.
    static ImpulseResponse scalar(const Eigen::VectorXd& values);

    ImpulseResponse operator-(const ImpulseResponse& rhs) const;
    ImpulseResponse operator+(const ImpulseResponse& rhs) const;
    ImpulseResponse operator*(double s) const;

  private:
    Index n_, p_, m_;
    Eigen::VectorXd data_;
};

/// Input-shaping weights k_j = sqrt(j) for j <= n, sqrt(2n-j) for j > n
/// (1-based j). k_j^2 equals the number of Hankel cells on antidiagonal j,
/// which is what makes the weighted operator an isometry.
struct ShapingWeights {
    Index n = 0;
    Eigen::VectorXd k; // length 2n-1

    /// All-ones weights of the same shape; turns the weighted operators
    /// into the plain ones.
    static ShapingWeights identity(Index n);
};

/// Dense block-Hankel matrix; block (i, l) is h_{i+l-1}, overall shape
/// (m*n) x (p*n). Rank equals the system order for exact impulse responses
/// of low-order systems.
struct HankelMatrix {
    Index n = 0, p = 0, m = 0;
    Eigen::MatrixXd data;
};

ShapingWeights shaping_weights(Index n);

/// Cells on antidiagonal j of an n x n grid: min(j, 2n-j), 1-based j.
Eigen::VectorXi antidiagonal_multiplicity(Index n);

HankelMatrix hankel_map(const ImpulseResponse& h);

/// Plain adjoint of hankel_map: block j of the result is the unweighted sum
/// of the blocks of M along antidiagonal j, so <H(h), M>_F = <h, H*(M)>.
ImpulseResponse hankel_adjoint(const Eigen::MatrixXd& M, Index n, Index p, Index m);

/// Weighted map G(beta) = H(K^{-1} beta); G(K h) = H(h) exactly.
HankelMatrix weighted_hankel_map(const ImpulseResponse& beta, const ShapingWeights& k);

/// Weighted adjoint, [G*(M)]_j = (antidiagonal block sum) / k_j.
/// Satisfies <G(beta), M> = <beta, G*(M)> and G*G = identity.
ImpulseResponse weighted_hankel_adjoint(const Eigen::MatrixXd& M, const ShapingWeights& k,
                                        Index p, Index m);

/// Frobenius inner product of two block vectors.
double block_dot(const ImpulseResponse& a, const ImpulseResponse& b);

/// Numerical rank at a relative threshold sigma_i / sigma_1 > tol.
Index numerical_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-8);

} // namespace sysid

#endif
