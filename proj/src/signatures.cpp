#include "ksbm/signatures.hpp"

#include "ksbm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ksbm {

template <class Scalar>
void BasicPath<Scalar>::validate() const {
    if (times.size() != values.rows()) throw ParameterError("path times and values disagree");
    for (Index k = 1; k < times.size(); ++k)
        if (!(times(k) > times(k - 1))) throw ParameterError("path times must increase strictly");
}

template struct BasicPath<double>;
template struct BasicPath<Complex>;

std::string to_string(Transform f) {
    return f == Transform::sin ? "sin" : "identity";
}

Transform transform_from_string(const std::string& s) {
    if (s == "identity" || s == "theta") return Transform::identity;
    if (s == "sin") return Transform::sin;
    throw ParameterError("unknown transform: " + s);
}

Path to_path(const Trajectory& traj) {
    Path p{traj.times, traj.phases};
    p.validate();
    return p;
}

Path unwrap(const Path& p) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    Path out = p;
    for (Index i = 0; i < p.values.cols(); ++i) {
        double offset = 0.0;
        for (Index k = 1; k < p.values.rows(); ++k) {
            const double jump = p.values(k, i) - p.values(k - 1, i);
            if (jump > std::numbers::pi || jump < -std::numbers::pi)
                offset -= two_pi * std::round(jump / two_pi);
            out.values(k, i) = p.values(k, i) + offset;
        }
    }
    return out;
}

Path unwrap(const Trajectory& traj) { return unwrap(to_path(traj)); }

Path wrap(const Path& p) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    Path out = p;
    out.values = p.values.unaryExpr([](double x) {
        return x - two_pi * std::floor((x + std::numbers::pi) / two_pi);
    });
    return out;
}

Path transform(const Path& p, Transform f) {
    if (f == Transform::identity) return p;
    Path out = p;
    out.values = p.values.array().sin().matrix();
    return out;
}

ComplexPath exp_i(const Path& p) {
    ComplexPath out;
    out.times = p.times;
    out.values = p.values.unaryExpr([](double x) { return std::polar(1.0, x); });
    return out;
}

template <class Scalar>
BasicPath<Scalar> restrict(const BasicPath<Scalar>& p, double a, double b) {
    p.validate();
    const Index K = p.times.size();
    if (K == 0) throw ParameterError("cannot restrict an empty path");
    a = std::max(a, p.times(0));
    b = std::min(b, p.times(K - 1));
    if (!(b >= a)) throw ParameterError("empty restriction window");

    auto sample = [&](double t) {
        // Largest k with times(k) <= t, kept inside [0, K-2].
        const auto it = std::upper_bound(p.times.data(), p.times.data() + K, t);
        Index k = std::max<Index>(static_cast<Index>(it - p.times.data()) - 1, 0);
        if (k >= K - 1) return typename BasicPath<Scalar>::Values(p.values.row(K - 1));
        const double w = (t - p.times(k)) / (p.times(k + 1) - p.times(k));
        if (w == 0.0) return typename BasicPath<Scalar>::Values(p.values.row(k));
        return typename BasicPath<Scalar>::Values(
            p.values.row(k) + Scalar(w) * (p.values.row(k + 1) - p.values.row(k)));
    };

    std::vector<Index> inner;
    for (Index k = 0; k < K; ++k)
        if (p.times(k) > a && p.times(k) < b) inner.push_back(k);
    const Index n_out = (a == b) ? 1 : static_cast<Index>(inner.size()) + 2;
    BasicPath<Scalar> out;
    out.times.resize(n_out);
    out.values.resize(n_out, p.values.cols());
    out.times(0) = a;
    out.values.row(0) = sample(a);
    if (a == b) return out;
    Index o = 1;
    for (Index k : inner) {
        out.times(o) = p.times(k);
        out.values.row(o) = p.values.row(k);
        ++o;
    }
    out.times(o) = b;
    out.values.row(o) = sample(b);
    return out;
}

template Path restrict(const Path&, double, double);
template ComplexPath restrict(const ComplexPath&, double, double);

std::size_t signature_entries(int dim, int level) {
    std::size_t total = 0, block = 1;
    for (int l = 0; l <= level; ++l) {
        total += block;
        if (l < level) {
            if (block > std::numeric_limits<std::size_t>::max() / std::max(dim, 1))
                return std::numeric_limits<std::size_t>::max();
            block *= static_cast<std::size_t>(dim);
        }
    }
    return total;
}

template <class Scalar>
Scalar BasicSignature<Scalar>::operator()(const std::vector<int>& I) const {
    const int l = static_cast<int>(I.size());
    if (l > level) throw ParameterError("multi-index longer than signature level");
    std::size_t idx = 0;
    for (int i : I) {
        if (i < 0 || i >= dim) throw ParameterError("multi-index entry out of range");
        idx = idx * dim + i;
    }
    return levels[l][idx];
}

template struct BasicSignature<double>;
template struct BasicSignature<Complex>;

namespace {

template <class Scalar>
BasicSignature<Scalar> empty_signature(int dim, int level) {
    BasicSignature<Scalar> s;
    s.dim = dim;
    s.level = level;
    s.levels.resize(level + 1);
    std::size_t block = 1;
    for (int l = 0; l <= level; ++l) {
        s.levels[l].assign(block, Scalar(0));
        block *= static_cast<std::size_t>(dim);
    }
    s.levels[0][0] = Scalar(1);
    return s;
}

// out += a (x) b for flattened tensors.
template <class Scalar>
void add_outer(std::vector<Scalar>& out, const std::vector<Scalar>& a,
               const std::vector<Scalar>& b) {
    const std::size_t nb = b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Scalar ai = a[i];
        if (ai == Scalar(0)) continue;
        Scalar* dst = out.data() + i * nb;
        for (std::size_t j = 0; j < nb; ++j) dst[j] += ai * b[j];
    }
}

void check_level(int dim, int level, std::size_t capacity) {
    if (level < 1) throw ParameterError("signature level must be >= 1");
    if (level > kMaxSignatureLevel)
        throw CapacityError("signature level exceeds the supported maximum");
    if (signature_entries(dim, level) > capacity)
        throw CapacityError("signature storage exceeds the configured capacity");
}

}  // namespace

template <class Scalar>
BasicSignature<Scalar> signature(const BasicPath<Scalar>& p, int level, bool base_at_zero,
                                 std::size_t capacity) {
    p.validate();
    const int N = p.dim();
    check_level(N, level, capacity);
    BasicSignature<Scalar> S = empty_signature<Scalar>(N, level);
    if (p.samples() < 2) return S;
    typename BasicPath<Scalar>::Values X = p.values;
    if (base_at_zero) X = X.rowwise() - X.row(0).eval();

    // seg[l] = delta^{(x) l} / l!
    std::vector<std::vector<Scalar>> seg(level + 1);
    seg[0] = {Scalar(1)};
    std::vector<Scalar> delta(N);
    for (Index k = 0; k + 1 < X.rows(); ++k) {
        for (int i = 0; i < N; ++i) delta[i] = X(k + 1, i) - X(k, i);
        for (int l = 1; l <= level; ++l) {
            seg[l].assign(seg[l - 1].size() * N, Scalar(0));
            std::vector<Scalar> scaled(N);
            for (int i = 0; i < N; ++i) scaled[i] = delta[i] / Scalar(l);
            add_outer(seg[l], seg[l - 1], scaled);
        }
        // Chen with a linear segment, top level first so lower levels are still old.
        for (int l = level; l >= 1; --l)
            for (int a = 0; a < l; ++a) add_outer(S.levels[l], S.levels[a], seg[l - a]);
    }
    return S;
}

template Signature signature(const Path&, int, bool, std::size_t);
template ComplexSignature signature(const ComplexPath&, int, bool, std::size_t);

template <class Scalar>
BasicSignature<Scalar> chen_product(const BasicSignature<Scalar>& a,
                                    const BasicSignature<Scalar>& b) {
    if (a.dim != b.dim || a.level != b.level)
        throw ParameterError("chen_product needs matching dimension and level");
    BasicSignature<Scalar> out = empty_signature<Scalar>(a.dim, a.level);
    out.levels[0][0] = Scalar(0);
    for (int l = 0; l <= a.level; ++l)
        for (int i = 0; i <= l; ++i) add_outer(out.levels[l], a.levels[i], b.levels[l - i]);
    return out;
}

template Signature chen_product(const Signature&, const Signature&);
template ComplexSignature chen_product(const ComplexSignature&, const ComplexSignature&);

Matrix lead_matrix(const Path& p, Execution exec) {
    p.validate();
    return exec == Execution::serial ? kernels::serial::lead_matrix(p.values)
                                     : kernels::omp::lead_matrix(p.values);
}

ComplexMatrix lead_matrix(const ComplexPath& p) {
    p.validate();
    const Index N = p.values.cols();
    ComplexMatrix L = ComplexMatrix::Zero(N, N);
    if (p.values.rows() < 2) return L;
    const ComplexMatrix Y = p.values.rowwise() - p.values.row(0);
    for (Index i = 0; i < N; ++i) {
        for (Index j = i + 1; j < N; ++j) {
            Complex acc = 0.0;
            for (Index k = 0; k + 1 < Y.rows(); ++k)
                acc += Y(k, i) * (Y(k + 1, j) - Y(k, j)) - Y(k, j) * (Y(k + 1, i) - Y(k, i));
            L(i, j) = 0.5 * acc;
            L(j, i) = -L(i, j);
        }
    }
    return L;
}

Matrix covariance_matrix(const Path& p, Execution exec) {
    p.validate();
    if (p.samples() < 2) throw ParameterError("covariance needs at least two samples");
    return exec == Execution::serial ? kernels::serial::covariance(p.values)
                                     : kernels::omp::covariance(p.values);
}

std::string to_string(Statistic s) { return s == Statistic::lead ? "lead" : "cov"; }

Statistic statistic_from_string(const std::string& s) {
    if (s == "lead" || s == "L") return Statistic::lead;
    if (s == "cov" || s == "covariance") return Statistic::covariance;
    throw ParameterError("unknown statistic: " + s);
}

Matrix compute_statistic(const Path& p, Statistic stat, Execution exec) {
    return stat == Statistic::lead ? lead_matrix(p, exec) : covariance_matrix(p, exec);
}

RegimeMatrices regime_split(const Path& path, const RegimeBoundaries& bounds, double ss_horizon,
                            Statistic stat, Execution exec) {
    path.validate();
    if (path.samples() < 2) throw ParameterError("regime split needs at least two samples");
    const double t0 = path.times(0);
    const double t_end = path.times(path.samples() - 1);
    if (!(bounds.t_trans > t0)) throw ParameterError("t_trans must lie after the path start");
    if (bounds.t_ss && !(*bounds.t_ss > bounds.t_trans))
        throw ParameterError("t_trans must precede t_ss");
    if (!(ss_horizon > 0.0)) throw ParameterError("steady-state horizon must be positive");

    RegimeMatrices out;
    const double trans = std::min(bounds.t_trans, t_end);
    out.clusterization = {t0, trans};
    out.transient = {trans, bounds.t_ss ? std::min(*bounds.t_ss, t_end) : t_end};
    out.C = compute_statistic(restrict(path, out.clusterization.begin, out.clusterization.end),
                              stat, exec);
    out.TR = compute_statistic(restrict(path, out.transient.begin, out.transient.end), stat, exec);
    if (bounds.t_ss && *bounds.t_ss < t_end) {
        out.steady = Window{*bounds.t_ss, std::min(*bounds.t_ss + ss_horizon, t_end)};
        out.SS = compute_statistic(restrict(path, out.steady->begin, out.steady->end), stat, exec);
    }
    return out;
}

double analytic_ss_signature_theta(double omega, double T, int M) {
    if (M < 0) throw ParameterError("level must be >= 0");
    double v = 1.0;
    for (int k = 1; k <= M; ++k) v *= omega * T / k;
    return v;
}

Complex analytic_ss_signature_exp(const std::vector<double>& offsets, double omega, double T) {
    double phase = 0.0;
    for (double d : offsets) phase += d;
    const Complex lambda = std::polar(1.0, phase);
    const Complex step = std::polar(1.0, omega * T) - 1.0;
    Complex v = lambda;
    for (std::size_t k = 1; k <= offsets.size(); ++k) v *= step / static_cast<double>(k);
    return v;
}

double analytic_ss_lead_sin(double delta_theta, double omega, double T) {
    return 0.5 * std::sin(delta_theta) * (omega * T + std::sin(omega * T));
}

double analytic_ss_signature_sin(double theta_i, double theta_j, double omega, double T) {
    const double wT = omega * T;
    return 0.5 * wT * std::sin(theta_i - theta_j) +
           0.25 * (std::cos(theta_i + theta_j) - std::cos(2.0 * wT + theta_i + theta_j)) -
           std::sin(theta_i) * (std::sin(wT + theta_j) - std::sin(theta_j));
}

double analytic_ss_lead_sin_exact(double theta_i, double theta_j, double omega, double T) {
    return 0.5 * (analytic_ss_signature_sin(theta_i, theta_j, omega, T) -
                  analytic_ss_signature_sin(theta_j, theta_i, omega, T));
}

}  // namespace ksbm
