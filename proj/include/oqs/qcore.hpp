// qcore.hpp - dense complex linear algebra and state primitives shared by all modules.
//
// Basis ordering: factor 0 of a tensor product is the most significant index,
// so |q0 q1 ... q_{n-1}> sits at row q0*2^{n-1} + ... + q_{n-1}.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oqs {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;

inline constexpr cplx I1{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------- errors

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
struct dimension_error : error { using error::error; };
struct shape_error : error { using error::error; };
struct not_psd_error : error { using error::error; };
struct numeric_error : error { using error::error; };
struct unsupported_error : error { using error::error; };
struct domain_error : error { using error::error; };

namespace qcore {

inline std::size_t dim_cap = 4096;

inline constexpr double tol_herm = 1e-10;
inline constexpr double tol_tr = 1e-10;
inline constexpr double tol_psd = 1e-10;
inline constexpr double psd_clip = 1e-8;

// ---------------------------------------------------------------- rng

// xoshiro256** seeded through splitmix64.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t out = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return out;
    }

    // 53-bit uniform in [0,1)
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Independent stream for trial i of a run seeded with `seed`.
inline Rng split(std::uint64_t seed, std::uint64_t i) {
    return Rng(seed ^ (0xd1b54a32d192ed03ULL * (i + 1)));
}

// ---------------------------------------------------------------- basic helpers

inline void require_square(const cmat& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw shape_error(std::string(who) + ": matrix must be square and non-empty");
}

inline double herm_dev(const cmat& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const cmat& m, const char* who, double tol = tol_herm) {
    require_square(m, who);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (herm_dev(m) > tol * scale)
        throw domain_error(std::string(who) + ": matrix is not Hermitian");
}

inline bool all_finite(const cmat& m) {
    return m.allFinite();
}

inline cmat identity(Eigen::Index d) { return cmat::Identity(d, d); }

inline cmat pauli_x() { cmat m(2, 2); m << 0, 1, 1, 0; return m; }
inline cmat pauli_y() { cmat m(2, 2); m << 0, -I1, I1, 0; return m; }
inline cmat pauli_z() { cmat m(2, 2); m << 1, 0, 0, -1; return m; }
inline cmat pauli(int k) {
    switch (k) {
    case 0: return identity(2);
    case 1: return pauli_x();
    case 2: return pauli_y();
    case 3: return pauli_z();
    default: throw domain_error("pauli: index must be 0..3");
    }
}

inline cvec ket(Eigen::Index d, Eigen::Index i) {
    cvec v = cvec::Zero(d);
    v(i) = 1.0;
    return v;
}

inline cmat projector(const cvec& v) { return v * v.adjoint(); }

inline cmat tensor(const cmat& a, const cmat& b) {
    const auto r = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
    const auto c = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
    if (r > dim_cap || c > dim_cap)
        throw dimension_error("tensor: product dimension " + std::to_string(std::max(r, c)) +
                              " exceeds cap " + std::to_string(dim_cap));
    cmat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline cmat tensor(std::initializer_list<cmat> ms) {
    cmat out = cmat::Ones(1, 1);
    for (const auto& m : ms) out = tensor(out, m);
    return out;
}

inline cvec tensor_vec(const cvec& a, const cvec& b) {
    cvec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

// Operator `op` placed on factor `site` of a register with factor dims `dims`.
inline cmat embed(const cmat& op, const std::vector<int>& dims, int site) {
    if (site < 0 || site >= static_cast<int>(dims.size()))
        throw shape_error("embed: site out of range");
    if (op.rows() != dims[site] || op.cols() != dims[site])
        throw shape_error("embed: operator does not match factor dimension");
    cmat out = cmat::Ones(1, 1);
    for (int k = 0; k < static_cast<int>(dims.size()); ++k)
        out = tensor(out, k == site ? op : identity(dims[k]));
    return out;
}

// Partial trace of a (not necessarily normalized) operator; `keep` lists factors to retain.
inline cmat partial_trace_op(const cmat& m, const std::vector<int>& dims, std::vector<int> keep) {
    require_square(m, "partial_trace");
    const int n = static_cast<int>(dims.size());
    long total = 1;
    for (int d : dims) {
        if (d < 1) throw shape_error("partial_trace: factor dims must be positive");
        total *= d;
    }
    if (total != m.rows()) throw shape_error("partial_trace: dims do not multiply to matrix size");
    if (keep.empty()) throw shape_error("partial_trace: keep set is empty");
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    for (int k : keep)
        if (k < 0 || k >= n) throw shape_error("partial_trace: keep index out of range");

    std::vector<int> traced;
    for (int k = 0; k < n; ++k)
        if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);

    std::vector<long> stride(n, 1);
    for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];

    long dk = 1, dt = 1;
    for (int k : keep) dk *= dims[k];
    for (int k : traced) dt *= dims[k];

    // offsets of each kept / traced multi-index in the full register
    auto offsets = [&](const std::vector<int>& set, long count) {
        std::vector<long> off(count, 0);
        for (long idx = 0; idx < count; ++idx) {
            long rem = idx, o = 0;
            for (int p = static_cast<int>(set.size()) - 1; p >= 0; --p) {
                const int f = set[p];
                o += (rem % dims[f]) * stride[f];
                rem /= dims[f];
            }
            off[idx] = o;
        }
        return off;
    };
    const auto ko = offsets(keep, dk);
    const auto to = offsets(traced, dt);

    cmat out = cmat::Zero(dk, dk);
    for (long i = 0; i < dk; ++i)
        for (long j = 0; j < dk; ++j) {
            cplx s = 0.0;
            for (long t = 0; t < dt; ++t) s += m(ko[i] + to[t], ko[j] + to[t]);
            out(i, j) = s;
        }
    return out;
}

// ---------------------------------------------------------------- eigensolvers

struct EighResult {
    rvec values;   // ascending
    cmat vectors;  // columns
};

// Cyclic complex Jacobi.
inline EighResult eigh(const cmat& m_in) {
    require_hermitian(m_in, "eigh");
    const Eigen::Index d = m_in.rows();
    cmat a = 0.5 * (m_in + m_in.adjoint());
    cmat v = identity(d);
    const double fro = std::max(a.norm(), std::numeric_limits<double>::min());

    auto off = [&] {
        double s = 0.0;
        for (Eigen::Index p = 0; p < d; ++p)
            for (Eigen::Index q = p + 1; q < d; ++q) s += std::norm(a(p, q));
        return std::sqrt(2.0 * s);
    };

    int sweep = 0;
    for (; sweep < 100 && off() > 1e-15 * fro; ++sweep) {
        for (Eigen::Index p = 0; p < d - 1; ++p)
            for (Eigen::Index q = p + 1; q < d; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const cplx ph = apq / mag;
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double th = 0.5 * std::atan2(2.0 * mag, aqq - app);
                const double c = std::cos(th), s = std::sin(th);
                const cplx jqp = -s * std::conj(ph);  // J(q,p)
                const cplx jpq = s * ph;              // J(p,q)
                for (Eigen::Index k = 0; k < d; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * c + akq * jqp;
                    a(k, q) = akp * jpq + akq * c;
                }
                for (Eigen::Index k = 0; k < d; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk + std::conj(jqp) * aqk;
                    a(q, k) = std::conj(jpq) * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < d; ++k) {
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * c + vkq * jqp;
                    v(k, q) = vkp * jpq + vkq * c;
                }
            }
    }
    if (off() > 1e-12 * fro) throw numeric_error("eigh: Jacobi sweeps did not converge");

    std::vector<Eigen::Index> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto i, auto j) { return a(i, i).real() < a(j, j).real(); });
    EighResult r{rvec(d), cmat(d, d)};
    for (Eigen::Index k = 0; k < d; ++k) {
        r.values(k) = a(order[k], order[k]).real();
        r.vectors.col(k) = v.col(order[k]);
    }
    return r;
}

// Hessenberg reduction + shifted QR (complex Schur form).
inline Eigen::VectorXcd eig_general(const cmat& m) {
    require_square(m, "eig_general");
    if (!m.allFinite()) throw numeric_error("eig_general: non-finite input");
    Eigen::ComplexEigenSolver<cmat> es;
    es.setMaxIterations(60 * static_cast<Eigen::Index>(m.rows()));
    es.compute(m, false);
    if (es.info() != Eigen::Success) throw numeric_error("eig_general: QR iteration did not converge");
    return es.eigenvalues();
}

inline Eigen::VectorXcd eig_general(const rmat& m) {
    return eig_general(cmat(m.cast<cplx>()));
}

// ---------------------------------------------------------------- matrix functions

inline cmat hermitian_function(const EighResult& e, const std::function<cplx(double)>& f) {
    cvec fv(e.values.size());
    for (Eigen::Index k = 0; k < fv.size(); ++k) fv(k) = f(e.values(k));
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

inline cmat sqrtm_psd(const cmat& m) {
    require_hermitian(m, "sqrtm_psd", 1e-9);
    const auto e = eigh(m);
    if (e.values(0) < -psd_clip)
        throw not_psd_error("sqrtm_psd: eigenvalue " + std::to_string(e.values(0)) + " below -1e-8");
    return hermitian_function(e, [](double x) { return cplx(std::sqrt(std::max(x, 0.0)), 0.0); });
}

// exp(-i h t)
inline cmat expm_skew(const cmat& h, double t) {
    require_hermitian(h, "expm_skew", 1e-9);
    const auto e = eigh(h);
    return hermitian_function(e, [t](double x) { return std::exp(-I1 * (x * t)); });
}

inline bool is_psd(const cmat& m, double tol = tol_psd) {
    return eigh(m).values(0) >= -tol;
}

// ---------------------------------------------------------------- density matrices

class DensityMatrix {
public:
    DensityMatrix() : m_(cmat::Ones(1, 1)) {}

    explicit DensityMatrix(cmat m) : m_(std::move(m)) { validate(); }

    static DensityMatrix pure(const cvec& psi) {
        const double n = psi.norm();
        if (n <= 0.0 || !psi.allFinite()) throw domain_error("DensityMatrix::pure: zero or non-finite vector");
        const cvec u = psi / n;
        return DensityMatrix(u * u.adjoint());
    }

    // Renormalize by trace and symmetrize; used after non-trace-preserving updates.
    static DensityMatrix normalized(const cmat& m) {
        require_square(m, "DensityMatrix::normalized");
        const cplx tr = m.trace();
        if (!(std::abs(tr) > 0.0)) throw numeric_error("DensityMatrix::normalized: zero trace");
        cmat r = 0.5 * (m + m.adjoint()) / tr.real();
        return DensityMatrix(std::move(r));
    }

    const cmat& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    void validate() const {
        require_square(m_, "DensityMatrix");
        if (!m_.allFinite()) throw numeric_error("DensityMatrix: non-finite entries");
        if (herm_dev(m_) > tol_herm) throw domain_error("DensityMatrix: not Hermitian");
        if (std::abs(m_.trace() - 1.0) > tol_tr) throw domain_error("DensityMatrix: trace differs from 1");
        if (!is_psd(m_)) throw not_psd_error("DensityMatrix: negative eigenvalue");
    }

    cmat m_;
};

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& dims,
                                   const std::vector<int>& keep) {
    return DensityMatrix::normalized(partial_trace_op(rho.mat(), dims, keep));
}

// Uhlmann fidelity Tr sqrt(sqrt(tau) ups sqrt(tau)) for positive operators (no trace check).
inline double fidelity_op(const cmat& tau, const cmat& ups) {
    if (tau.rows() != ups.rows() || tau.cols() != ups.cols())
        throw shape_error("fidelity: dimension mismatch");
    const cmat s = sqrtm_psd(tau);
    cmat inner = s * ups * s;
    inner = 0.5 * (inner + inner.adjoint());
    const auto e = eigh(inner);
    if (e.values(0) < -psd_clip) throw not_psd_error("fidelity: negative eigenvalue in sqrt(tau) ups sqrt(tau)");
    double f = 0.0;
    for (Eigen::Index k = 0; k < e.values.size(); ++k) f += std::sqrt(std::max(e.values(k), 0.0));
    return f;
}

inline double fidelity(const DensityMatrix& tau, const DensityMatrix& ups) {
    return std::clamp(fidelity_op(tau.mat(), ups.mat()), 0.0, 1.0);
}

inline double trace_distance(const cmat& a, const cmat& b) {
    const auto e = eigh(a - b);
    return 0.5 * e.values.cwiseAbs().sum();
}

// von Neumann entropy, natural log
inline double entropy(const cmat& rho) {
    const auto e = eigh(rho);
    double s = 0.0;
    for (Eigen::Index k = 0; k < e.values.size(); ++k) {
        const double p = e.values(k);
        if (p > 1e-300) s -= p * std::log(p);
    }
    return s;
}

// ---------------------------------------------------------------- random sampling

inline cvec random_state(Eigen::Index d, Rng& rng) {
    cvec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = cplx(rng.normal(), rng.normal());
    return v / v.norm();
}

inline cmat ginibre(Eigen::Index r, Eigen::Index c, Rng& rng) {
    cmat g(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
    return g;
}

// Haar unitary: QR of a Ginibre matrix with the R-diagonal phases removed.
inline cmat random_unitary(Eigen::Index d, Rng& rng) {
    const cmat g = ginibre(d, d, rng);
    Eigen::HouseholderQR<cmat> qr(g);
    cmat q = qr.householderQ();
    const cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < d; ++k) {
        const cplx rk = r(k, k);
        const double a = std::abs(rk);
        q.col(k) *= (a > 0 ? rk / a : cplx(1.0));
    }
    return q;
}

inline cmat random_hermitian(Eigen::Index d, Rng& rng) {
    const cmat g = ginibre(d, d, rng);
    return 0.5 * (g + g.adjoint());
}

// Mixed state from a d x k Ginibre matrix (k = d gives Hilbert-Schmidt measure).
inline DensityMatrix random_density(Eigen::Index d, Rng& rng, Eigen::Index k = -1) {
    if (k <= 0) k = d;
    const cmat g = ginibre(d, k, rng);
    return DensityMatrix::normalized(g * g.adjoint());
}

}  // namespace qcore
}  // namespace oqs
