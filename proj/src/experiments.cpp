#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <Eigen/QR>
#include <sbcpn/experiments.hpp>

namespace sbcpn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dct_scale(Index k, Index N)
{
    return std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(N));
}

double dct_entry(Index k, Index j, Index N)
{
    return dct_scale(k, N) * std::cos(kPi * static_cast<double>(2 * j + 1) * static_cast<double>(k) /
                                      (2.0 * static_cast<double>(N)));
}

// first `count` entries of a uniformly random permutation of 0..n-1, sorted
std::vector<Index> random_subset(Index n, Index count, std::mt19937_64& rng)
{
    std::vector<Index> pool(static_cast<size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < count; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
    }
    pool.resize(static_cast<size_t>(count));
    std::sort(pool.begin(), pool.end());
    return pool;
}

SparseRowMatrix select_rows(const SparseRowMatrix& Z, const BlockIndexSet& block)
{
    SparseRowMatrix out(block.size(), Z.cols());
    Eigen::VectorXi nnz(block.size());
    for (Index i = 0; i < block.size(); ++i) nnz[i] = static_cast<int>(Z.innerVector(block[i]).nonZeros());
    out.reserve(nnz);
    for (Index i = 0; i < block.size(); ++i)
        for (SparseRowMatrix::InnerIterator it(Z, block[i]); it; ++it) out.insert(i, it.col()) = it.value();
    out.makeCompressed();
    return out;
}

/// A_S^T diag(D) A_S with dense columns A_S.
class DenseGramOperator final : public RestrictedOperator
{
public:
    DenseGramOperator(Matrix As, Vector D, std::optional<double> floor, std::optional<double> norm)
        : As_(std::move(As)), D_(std::move(D)), floor_(floor), norm_(norm)
    {}
    Index size() const override { return As_.cols(); }
    void apply(const Vector& v, Vector& out) const override
    {
        const Vector w = D_.cwiseProduct(As_ * v);
        out.noalias() = As_.transpose() * w;
    }
    std::optional<double> curvature_floor() const override { return floor_; }
    std::optional<double> norm_bound() const override { return norm_; }
    Matrix to_dense() const override
    {
        Matrix out = As_.transpose() * D_.asDiagonal() * As_;
        return 0.5 * (out + out.transpose());
    }

private:
    Matrix As_;
    Vector D_;
    std::optional<double> floor_;
    std::optional<double> norm_;
};

/// Z_S diag(d) Z_S^T + shift I with sparse rows Z_S.
class SparseGramOperator final : public RestrictedOperator
{
public:
    SparseGramOperator(SparseRowMatrix Zs, Vector d, double shift, std::optional<double> floor,
                       std::optional<double> norm)
        : Zs_(std::move(Zs)), d_(std::move(d)), shift_(shift), floor_(floor), norm_(norm)
    {}
    Index size() const override { return Zs_.rows(); }
    void apply(const Vector& v, Vector& out) const override
    {
        const Vector w = d_.cwiseProduct(Zs_.transpose() * v);
        out.noalias() = Zs_ * w;
        out += shift_ * v;
    }
    std::optional<double> curvature_floor() const override { return floor_; }
    std::optional<double> norm_bound() const override { return norm_; }
    Matrix to_dense() const override
    {
        const Matrix zd = Matrix(Zs_) * d_.asDiagonal();
        Matrix out = zd * Matrix(Zs_).transpose();
        out = 0.5 * (out + out.transpose());
        out.diagonal().array() += shift_;
        return out;
    }

private:
    SparseRowMatrix Zs_;
    Vector d_;
    double shift_;
    std::optional<double> floor_;
    std::optional<double> norm_;
};

Vector squared_column_norms(const SparseRowMatrix& Zs)
{
    Vector out = Vector::Zero(Zs.cols());
    for (Index r = 0; r < Zs.outerSize(); ++r)
        for (SparseRowMatrix::InnerIterator it(Zs, r); it; ++it) out[it.col()] += it.value() * it.value();
    return out;
}

void check_classification(const ClassificationInstance& inst)
{
    require(inst.Z.rows() >= 1 && inst.Z.cols() >= 1, "classification instance: empty feature matrix");
    require(inst.labels.size() == inst.Z.cols(), "classification instance: one label per sample required");
    require(inst.lambda >= 0.0, "classification instance: lambda must be nonnegative");
}

} // namespace

Vector dct2(const Vector& x)
{
    const Index N = x.size();
    Vector out(N);
    for (Index k = 0; k < N; ++k) {
        double acc = 0.0;
        for (Index j = 0; j < N; ++j) acc += x[j] * dct_entry(k, j, N);
        out[k] = acc;
    }
    return out;
}

Vector idct2(const Vector& y)
{
    const Index N = y.size();
    Vector out(N);
    for (Index j = 0; j < N; ++j) {
        double acc = 0.0;
        for (Index k = 0; k < N; ++k) acc += y[k] * dct_entry(k, j, N);
        out[j] = acc;
    }
    return out;
}

std::vector<Index> random_dct_rows(Index m, Index n, std::mt19937_64& rng)
{
    require(m >= 1 && n >= 1, "random_dct_rows: sizes must be positive");
    return random_subset(std::max(m, n), m, rng);
}

Matrix partial_dct_matrix(Index m, Index n, const std::vector<Index>& rows)
{
    const Index N = std::max(m, n);
    require(static_cast<Index>(rows.size()) == m, "partial_dct_matrix: need one row index per measurement");
    Matrix A(m, n);
    for (Index i = 0; i < m; ++i) {
        const Index k = rows[static_cast<size_t>(i)];
        require(k >= 0 && k < N, "partial_dct_matrix: row index out of range");
        for (Index j = 0; j < n; ++j) A(i, j) = dct_entry(k, j, N);
    }
    return A;
}

Matrix orthonormal_gaussian_matrix(Index m, Index n, std::mt19937_64& rng)
{
    require(m >= 1 && n >= 1, "orthonormal_gaussian_matrix: sizes must be positive");
    std::normal_distribution<double> normal;
    const bool tall = m >= n;
    const Index r = tall ? m : n;
    const Index c = tall ? n : m;
    Matrix G(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) G(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(r, c);
    return tall ? Q : Matrix(Q.transpose());
}

StudentsTInstance gen_students_t(Index n, std::uint64_t seed, MeasurementKind kind)
{
    require(n >= 40, "gen_students_t: n must be at least 40");
    std::mt19937_64 rng(seed);
    StudentsTInstance inst;
    inst.kind = kind;
    inst.nu = 0.25;
    const Index m = 2 * n;
    if (kind == MeasurementKind::dct) {
        inst.dct_rows = random_dct_rows(m, n, rng);
        inst.A = partial_dct_matrix(m, n, inst.dct_rows);
    } else {
        inst.A = orthonormal_gaussian_matrix(m, n, rng);
    }

    inst.x_true = Vector::Zero(n);
    const std::vector<Index> support = random_subset(n, n / 40, rng);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index i : support) {
        const double sign = coin(rng) ? 1.0 : -1.0;
        inst.x_true[i] = sign * std::pow(10.0, unit(rng));
    }

    std::normal_distribution<double> normal;
    std::chi_squared_distribution<double> chi2(5.0);
    Vector noise(m);
    for (Index i = 0; i < m; ++i) {
        const double z = normal(rng);
        noise[i] = z / std::sqrt(chi2(rng) / 5.0);
    }
    inst.b = inst.A * inst.x_true + 0.1 * noise;

    const StudentsTOracle oracle(inst);
    inst.lambda = 0.1 * oracle.gradient(Vector::Zero(n)).lpNorm<Eigen::Infinity>();
    return inst;
}

StudentsTOracle::StudentsTOracle(Matrix A, Vector b, double nu) : A_(std::move(A)), b_(std::move(b)), nu_(nu)
{
    require(A_.rows() == b_.size(), "StudentsTOracle: A and b disagree");
    require(nu_ > 0.0, "StudentsTOracle: nu must be positive");
}

double StudentsTOracle::value(const Vector& x) const
{
    require(x.size() == dimension(), "StudentsTOracle::value: dimension mismatch");
    const Vector r = A_ * x - b_;
    return r.unaryExpr([this](double t) { return std::log1p(t * t / nu_); }).sum();
}

Vector StudentsTOracle::gradient(const Vector& x) const
{
    Vector g;
    value_and_gradient(x, g);
    return g;
}

double StudentsTOracle::value_and_gradient(const Vector& x, Vector& grad) const
{
    require(x.size() == dimension(), "StudentsTOracle: dimension mismatch");
    const Vector r = A_ * x - b_;
    double f = 0.0;
    Vector u(r.size());
    for (Index i = 0; i < r.size(); ++i) {
        const double t = r[i];
        f += std::log1p(t * t / nu_);
        u[i] = 2.0 * t / (nu_ + t * t);
    }
    grad.noalias() = A_.transpose() * u;
    return f;
}

std::unique_ptr<RestrictedOperator> StudentsTOracle::restricted_hessian(const Vector& x,
                                                                         const BlockIndexSet& block) const
{
    require(x.size() == dimension() && block.ambient_dimension() == dimension(),
            "StudentsTOracle::restricted_hessian: dimension mismatch");
    const Vector r = A_ * x - b_;
    Vector D(r.size());
    for (Index i = 0; i < r.size(); ++i) {
        const double t2 = r[i] * r[i];
        const double den = nu_ + t2;
        D[i] = 2.0 * (nu_ - t2) / (den * den);
    }
    Matrix As = block.is_full() ? A_ : Matrix(A_(Eigen::all, block.indices()));
    // ||A_S|| <= 1
    const double floor = std::min(0.0, D.minCoeff());
    const double norm = D.cwiseAbs().maxCoeff();
    return std::make_unique<DenseGramOperator>(std::move(As), std::move(D), floor, norm);
}

CompositeProblem students_t_problem(const StudentsTInstance& inst)
{
    return CompositeProblem(std::make_shared<StudentsTOracle>(inst), SeparableRegularizer::l1(inst.n(), inst.lambda));
}

double gm_loss(double t) { return 2.0 * t * t / (t * t + 4.0); }
double gm_d1(double t)
{
    const double s = t * t + 4.0;
    return 16.0 * t / (s * s);
}
double gm_d2(double t)
{
    const double s = t * t + 4.0;
    return 16.0 * (4.0 - 3.0 * t * t) / (s * s * s);
}

double bw_loss(double t) { return t * t / (t * t + 1.0); }
double bw_d1(double t)
{
    const double s = t * t + 1.0;
    return 2.0 * t / (s * s);
}
double bw_d2(double t)
{
    const double s = t * t + 1.0;
    return (2.0 - 6.0 * t * t) / (s * s * s);
}

ClassificationInstance gen_classification(Index n, Index m, double lambda, LabelCoding coding, std::uint64_t seed)
{
    require(n >= 1 && m >= 1, "gen_classification: sizes must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vector w(n);
    for (Index i = 0; i < n; ++i) w[i] = normal(rng);
    Matrix Z(n, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < n; ++i) Z(i, j) = normal(rng);
        Z.col(j).normalize();
    }
    std::bernoulli_distribution flip(0.1);
    ClassificationInstance inst;
    inst.labels.resize(m);
    for (Index j = 0; j < m; ++j) {
        bool positive = w.dot(Z.col(j)) > 0.0;
        if (flip(rng)) positive = !positive;
        inst.labels[j] = positive ? 1.0 : (coding == LabelCoding::zero_one ? 0.0 : -1.0);
    }
    inst.Z = Z.sparseView();
    inst.Z.makeCompressed();
    inst.lambda = lambda;
    return inst;
}

GemanMcClureOracle::GemanMcClureOracle(ClassificationInstance inst) : inst_(std::move(inst))
{
    check_classification(inst_);
}

double GemanMcClureOracle::value(const Vector& x) const
{
    require(x.size() == dimension(), "GemanMcClureOracle::value: dimension mismatch");
    const Vector t = inst_.labels - inst_.Z.transpose() * x;
    const double m = static_cast<double>(inst_.m());
    return t.unaryExpr([](double v) { return gm_loss(v); }).sum() / m + inst_.lambda * x.squaredNorm();
}

Vector GemanMcClureOracle::gradient(const Vector& x) const
{
    Vector g;
    value_and_gradient(x, g);
    return g;
}

double GemanMcClureOracle::value_and_gradient(const Vector& x, Vector& grad) const
{
    require(x.size() == dimension(), "GemanMcClureOracle: dimension mismatch");
    const Vector t = inst_.labels - inst_.Z.transpose() * x;
    const double m = static_cast<double>(inst_.m());
    double f = 0.0;
    Vector u(t.size());
    for (Index j = 0; j < t.size(); ++j) {
        f += gm_loss(t[j]);
        u[j] = gm_d1(t[j]) / m;
    }
    grad.noalias() = -(inst_.Z * u);
    grad += 2.0 * inst_.lambda * x;
    return f / m + inst_.lambda * x.squaredNorm();
}

std::unique_ptr<RestrictedOperator> GemanMcClureOracle::restricted_hessian(const Vector& x,
                                                                            const BlockIndexSet& block) const
{
    require(x.size() == dimension() && block.ambient_dimension() == dimension(),
            "GemanMcClureOracle::restricted_hessian: dimension mismatch");
    const Vector t = inst_.labels - inst_.Z.transpose() * x;
    const double m = static_cast<double>(inst_.m());
    const Vector d = t.unaryExpr([m](double v) { return gm_d2(v) / m; });
    SparseRowMatrix Zs = block.is_full() ? inst_.Z : select_rows(inst_.Z, block);
    const Vector col2 = squared_column_norms(Zs);
    // lambda_min(sum_j d_j z_j z_j^T) >= sum_j min(0, d_j) ||z_j||^2
    const double shift = 2.0 * inst_.lambda;
    const double floor = shift + d.cwiseMin(0.0).dot(col2);
    const double norm = shift + d.cwiseAbs().dot(col2);
    return std::make_unique<SparseGramOperator>(std::move(Zs), d, shift, floor, norm);
}

CompositeProblem geman_mcclure_problem(const ClassificationInstance& inst)
{
    return CompositeProblem(std::make_shared<GemanMcClureOracle>(inst), SeparableRegularizer::zero(inst.n()));
}

BiweightOracle::BiweightOracle(ClassificationInstance inst) : inst_(std::move(inst))
{
    check_classification(inst_);
}

double BiweightOracle::value(const Vector& x) const
{
    require(x.size() == dimension(), "BiweightOracle::value: dimension mismatch");
    const Vector t = inst_.Z.transpose() * x - inst_.labels;
    return t.unaryExpr([](double v) { return bw_loss(v); }).sum() / static_cast<double>(inst_.m());
}

Vector BiweightOracle::gradient(const Vector& x) const
{
    Vector g;
    value_and_gradient(x, g);
    return g;
}

double BiweightOracle::value_and_gradient(const Vector& x, Vector& grad) const
{
    require(x.size() == dimension(), "BiweightOracle: dimension mismatch");
    const Vector t = inst_.Z.transpose() * x - inst_.labels;
    const double m = static_cast<double>(inst_.m());
    double f = 0.0;
    Vector u(t.size());
    for (Index j = 0; j < t.size(); ++j) {
        f += bw_loss(t[j]);
        u[j] = bw_d1(t[j]) / m;
    }
    grad.noalias() = inst_.Z * u;
    return f / m;
}

std::unique_ptr<RestrictedOperator> BiweightOracle::restricted_hessian(const Vector& x,
                                                                        const BlockIndexSet& block) const
{
    require(x.size() == dimension() && block.ambient_dimension() == dimension(),
            "BiweightOracle::restricted_hessian: dimension mismatch");
    const Vector t = inst_.Z.transpose() * x - inst_.labels;
    const double m = static_cast<double>(inst_.m());
    const Vector d = t.unaryExpr([m](double v) { return std::max(bw_d2(v) / m, kBiweightCurvatureClamp); });
    SparseRowMatrix Zs = block.is_full() ? inst_.Z : select_rows(inst_.Z, block);
    const double norm = d.dot(squared_column_norms(Zs));
    return std::make_unique<SparseGramOperator>(std::move(Zs), d, 0.0, 0.0, norm);
}

BiweightGroupProblem biweight_group_instance(ClassificationInstance inst)
{
    for (Index j = 0; j < inst.labels.size(); ++j)
        require(inst.labels[j] == 1.0 || inst.labels[j] == -1.0, "biweight_group_instance: labels must be +-1");
    require(inst.lambda > 0.0, "biweight_group_instance: lambda must be positive");
    const Index n = inst.n();
    const double lambda = inst.lambda;
    auto oracle = std::make_shared<const BiweightOracle>(std::move(inst));
    auto reg = SeparableRegularizer::group_l2_uniform(n, 5, lambda);
    CompositeProblem problem(oracle, reg);
    return BiweightGroupProblem{std::move(oracle), std::move(reg), std::move(problem)};
}

void write_instance(std::ostream& out, const StudentsTInstance& inst)
{
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << inst.n() << '\n' << inst.m() << '\n' << inst.nu << '\n' << inst.lambda << '\n';
    if (inst.kind == MeasurementKind::dct) {
        out << 0 << '\n';
        for (Index r : inst.dct_rows) out << r << '\n';
    } else {
        out << 1 << '\n';
        for (Index j = 0; j < inst.A.cols(); ++j)
            for (Index i = 0; i < inst.A.rows(); ++i) out << inst.A(i, j) << '\n';
    }
    for (Index i = 0; i < inst.b.size(); ++i) out << inst.b[i] << '\n';
    for (Index i = 0; i < inst.x_true.size(); ++i) out << inst.x_true[i] << '\n';
    if (!out) throw std::runtime_error("write_instance: write failed");
}

StudentsTInstance read_instance(std::istream& in)
{
    auto next = [&in](const char* what) {
        double v;
        if (!(in >> v)) throw ParseError(std::string("instance file: missing or malformed ") + what);
        return v;
    };
    StudentsTInstance inst;
    const auto n = static_cast<Index>(next("n"));
    const auto m = static_cast<Index>(next("m"));
    if (n < 1 || m < 1) throw ParseError("instance file: n and m must be positive");
    inst.nu = next("nu");
    inst.lambda = next("lambda");
    const int kind = static_cast<int>(next("operator kind"));
    if (kind == 0) {
        inst.kind = MeasurementKind::dct;
        for (Index i = 0; i < m; ++i) inst.dct_rows.push_back(static_cast<Index>(next("row index")));
        inst.A = partial_dct_matrix(m, n, inst.dct_rows);
    } else if (kind == 1) {
        inst.kind = MeasurementKind::gaussian;
        inst.A.resize(m, n);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < m; ++i) inst.A(i, j) = next("matrix entry");
    } else {
        throw ParseError("instance file: unknown operator kind");
    }
    inst.b.resize(m);
    for (Index i = 0; i < m; ++i) inst.b[i] = next("b");
    inst.x_true.resize(n);
    for (Index i = 0; i < n; ++i) inst.x_true[i] = next("x_true");
    return inst;
}

} // namespace sbcpn
