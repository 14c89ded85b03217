#pragma once
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <sbcpn/problem.hpp>

namespace sbcpn {

// ---- discrete cosine transform ----------------------------------------

/// Orthonormal DCT-II: X_k = s_k sum_j x_j cos(pi (2j+1) k / 2N), s_0 = sqrt(1/N), s_k = sqrt(2/N).
Vector dct2(const Vector& x);
/// Inverse of dct2 (the orthonormal DCT-III), which is also its adjoint.
Vector idct2(const Vector& y);

enum class MeasurementKind { dct, gaussian };

/*
 * Partial DCT measurement matrix. With N = max(m, n), row i is row J[i] of
 * the N-point orthonormal DCT-II, restricted to the first n columns (x is
 * zero-padded to length N). J is a random m-subset of {0..N-1}, kept in
 * increasing order. ||A|| <= 1; columns are orthonormal when m >= n and
 * rows are orthonormal when m <= n.
 */
Matrix partial_dct_matrix(Index m, Index n, const std::vector<Index>& rows);
std::vector<Index> random_dct_rows(Index m, Index n, std::mt19937_64& rng);

/// Gaussian m x n matrix orthonormalized by QR (orthonormal columns if m >= n, rows otherwise).
Matrix orthonormal_gaussian_matrix(Index m, Index n, std::mt19937_64& rng);

// ---- Student's t regression -------------------------------------------

struct StudentsTInstance
{
    MeasurementKind kind = MeasurementKind::dct;
    std::vector<Index> dct_rows;   // only for kind == dct
    Matrix A;                      // m x n
    Vector b;
    double nu = 0.25;
    double lambda = 0.0;
    Vector x_true;

    Index n() const { return A.cols(); }
    Index m() const { return A.rows(); }
};

/*
 * m = 2n measurements of a sparse x_true with floor(n/40) entries
 * sign * 10^U, U ~ U[0, 1]; noise 0.1 * t_5; lambda = 0.1 ||grad f(0)||_inf.
 */
StudentsTInstance gen_students_t(Index n, std::uint64_t seed, MeasurementKind kind = MeasurementKind::dct);

/// f(x) = sum_i log(1 + (Ax - b)_i^2 / nu), exact Hessian A^T D A. Assumes ||A|| <= 1.
class StudentsTOracle final : public SmoothOracle
{
public:
    StudentsTOracle(Matrix A, Vector b, double nu);
    explicit StudentsTOracle(const StudentsTInstance& inst) : StudentsTOracle(inst.A, inst.b, inst.nu) {}

    Index dimension() const override { return A_.cols(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double value_and_gradient(const Vector& x, Vector& grad) const override;
    std::unique_ptr<RestrictedOperator>
    restricted_hessian(const Vector& x, const BlockIndexSet& block) const override;
    /// 2/nu, valid because ||A|| <= 1
    std::optional<double> lipschitz_bound() const override { return 2.0 / nu_; }

    const Matrix& matrix() const { return A_; }

private:
    Matrix A_;
    Vector b_;
    double nu_;
};

CompositeProblem students_t_problem(const StudentsTInstance& inst);

// ---- classification losses --------------------------------------------

/// Geman-McClure loss 2t^2/(t^2+4) and its first two derivatives.
double gm_loss(double t);
double gm_d1(double t);
double gm_d2(double t);

/// Biweight loss t^2/(t^2+1) and its first two derivatives.
double bw_loss(double t);
double bw_d1(double t);
double bw_d2(double t);

/// Features are stored n x m: column j is sample z_j.
struct ClassificationInstance
{
    SparseRowMatrix Z;
    Vector labels;
    double lambda = 0.001;

    Index n() const { return Z.rows(); }
    Index m() const { return Z.cols(); }
};

enum class LabelCoding { zero_one, plus_minus_one };

/*
 * Gaussian features normalized to unit columns; labels from the sign of a
 * random linear score with 10% of them flipped.
 */
ClassificationInstance gen_classification(Index n, Index m, double lambda, LabelCoding coding, std::uint64_t seed);

/// f(x) = (1/m) sum_j l(y_j - z_j^T x) + lambda ||x||^2 with exact Hessian Z D Z^T + 2 lambda I.
class GemanMcClureOracle final : public SmoothOracle
{
public:
    explicit GemanMcClureOracle(ClassificationInstance inst);

    Index dimension() const override { return inst_.n(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double value_and_gradient(const Vector& x, Vector& grad) const override;
    std::unique_ptr<RestrictedOperator>
    restricted_hessian(const Vector& x, const BlockIndexSet& block) const override;
    /// 1 + 2 lambda, from l'' in [-1/4, 1] and unit-norm columns
    std::optional<double> lipschitz_bound() const override { return 1.0 + 2.0 * inst_.lambda; }
    EtaRule eta_rule() const override { return EtaRule::geman_mcclure; }

    const ClassificationInstance& instance() const { return inst_; }

private:
    ClassificationInstance inst_;
};

CompositeProblem geman_mcclure_problem(const ClassificationInstance& inst);

/*
 * f(x) = (1/m) sum_j phi(a_j^T x - b_j) with Q = A Dt A^T,
 * Dt_j = max(phi''(a_j^T x - b_j)/m, kBiweightCurvatureClamp).
 */
inline constexpr double kBiweightCurvatureClamp = 1e-8;

class BiweightOracle final : public SmoothOracle
{
public:
    explicit BiweightOracle(ClassificationInstance inst);

    Index dimension() const override { return inst_.n(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double value_and_gradient(const Vector& x, Vector& grad) const override;
    std::unique_ptr<RestrictedOperator>
    restricted_hessian(const Vector& x, const BlockIndexSet& block) const override;
    /// 2, from phi'' in [-1/2, 2] and unit-norm columns
    std::optional<double> lipschitz_bound() const override { return 2.0; }
    /// The clamp removes at most 1/(2m) + 1e-8 per sample.
    std::optional<double> hessian_error_bound() const override
    {
        return 0.5 + kBiweightCurvatureClamp * static_cast<double>(inst_.m());
    }
    EtaRule eta_rule() const override { return EtaRule::biweight; }

    const ClassificationInstance& instance() const { return inst_; }

private:
    ClassificationInstance inst_;
};

struct BiweightGroupProblem
{
    std::shared_ptr<const BiweightOracle> oracle;
    SeparableRegularizer regularizer;
    CompositeProblem problem;
};

/// Biweight loss plus lambda * sum of l2 norms over width-5 contiguous groups.
BiweightGroupProblem biweight_group_instance(ClassificationInstance inst);

// ---- instance files ---------------------------------------------------

/*
 * Text format, one value per line: n, m, nu, lambda, operator kind
 * (0 = dct, 1 = gaussian), then the m DCT row indices or the m*n matrix
 * entries in column-major order, then b (m values) and x_true (n values).
 */
void write_instance(std::ostream& out, const StudentsTInstance& inst);
StudentsTInstance read_instance(std::istream& in);

} // namespace sbcpn
