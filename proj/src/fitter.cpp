#include "qftscat/fitter.hpp"

#include "qftscat/error.hpp"
#include "qftscat/parallel.hpp"
#include "qftscat/phase_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace qftscat {

namespace {

constexpr std::int64_t kBlockAttempts = 4096;
constexpr std::int64_t kMaxAttempts = 100'000'000;

std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

std::vector<std::vector<ShellPoint>> sample_block(const phase_space::ShellConstraint& sc, int n, int r, double E_max,
                                                  double mass, std::uint64_t seed, std::uint64_t block) {
    auto rng = block_rng(seed, block);
    std::uniform_real_distribution<double> u(-E_max, E_max);
    std::bernoulli_distribution coin(0.5);
    const int dim = sc.dim();
    const FourVector zero(dim);
    std::vector<double> free(static_cast<std::size_t>(sc.free_dimension()));
    std::vector<FourVector> k(static_cast<std::size_t>(n));
    std::vector<std::vector<ShellPoint>> out;
    for (std::int64_t a = 0; a < kBlockAttempts; ++a) {
        for (auto& x : free) x = u(rng);
        std::vector<std::vector<FourVector>> roots;
        sc.solve(free.data(), zero, k, [&](double) { roots.push_back(k); });
        if (roots.empty()) continue;
        const auto& pick = roots.size() == 1 || !coin(rng) ? roots.front() : roots.back();
        bool ok = true;
        double forward = 0.0;
        for (int l = 0; l < n && ok; ++l) {
            const FourVector& q = pick[static_cast<std::size_t>(l)];
            if (q.spatial_norm2() > E_max * E_max) ok = false;
            if ((l < r) != (q.energy() < 0.0)) ok = false;
            if (l >= r) forward += q.energy();
        }
        if (!ok || forward > E_max) continue;
        std::vector<ShellPoint> pt;
        for (const auto& q : pick) pt.push_back(ShellPoint::from_momentum(q, mass));
        out.push_back(std::move(pt));
    }
    return out;
}

using Monomial = std::vector<int>;  // exponents over the off-diagonal pairs

struct Orbit {
    int degree = 0;
    std::vector<Monomial> members;
};

std::vector<std::pair<int, int>> offdiagonal_pairs(int n) {
    std::vector<std::pair<int, int>> p;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < j; ++i) p.emplace_back(i, j);
    return p;
}

void monomials_of_degree(int vars, int degree, Monomial& cur, int pos, std::vector<Monomial>& out) {
    if (pos == vars - 1) {
        cur[static_cast<std::size_t>(pos)] = degree;
        out.push_back(cur);
        return;
    }
    for (int e = degree; e >= 0; --e) {
        cur[static_cast<std::size_t>(pos)] = e;
        monomials_of_degree(vars, degree - e, cur, pos + 1, out);
    }
}

// S_n orbits of the monomials of one degree.
std::vector<Orbit> orbits_of_degree(int n, int degree) {
    const auto pairs = offdiagonal_pairs(n);
    const int vars = static_cast<int>(pairs.size());
    std::vector<Monomial> mons;
    Monomial cur(static_cast<std::size_t>(vars), 0);
    if (vars == 0) {
        if (degree == 0) mons.push_back(cur);
    } else {
        monomials_of_degree(vars, degree, cur, 0, mons);
    }
    std::vector<std::vector<int>> images;  // pair index -> image pair index, per permutation
    std::vector<int> sigma(static_cast<std::size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
        std::vector<int> img;
        for (auto [i, j] : pairs) {
            int a = sigma[static_cast<std::size_t>(i)];
            int b = sigma[static_cast<std::size_t>(j)];
            if (a > b) std::swap(a, b);
            img.push_back(static_cast<int>(std::find(pairs.begin(), pairs.end(), std::make_pair(a, b)) - pairs.begin()));
        }
        images.push_back(std::move(img));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    std::map<Monomial, std::size_t> index;
    std::vector<Orbit> orbits;
    for (const auto& m : mons) {
        Monomial rep = m;
        for (const auto& img : images) {
            Monomial t(m.size(), 0);
            for (std::size_t p = 0; p < m.size(); ++p) t[static_cast<std::size_t>(img[p])] = m[p];
            rep = std::min(rep, t);
        }
        auto [it, inserted] = index.emplace(rep, orbits.size());
        if (inserted) orbits.push_back(Orbit{degree, {}});
        orbits[it->second].members.push_back(m);
    }
    return orbits;
}

struct Design {
    std::vector<std::vector<double>> x;  // scaled off-diagonal invariants per point
};

std::vector<double> scaled_pairs(const InvariantVector& q, const std::vector<std::pair<int, int>>& pairs, double scale) {
    std::vector<double> x;
    for (auto [i, j] : pairs) x.push_back(q.at(i, j) / scale);
    return x;
}

double orbit_value(const Orbit& o, const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& m : o.members) {
        double v = 1.0;
        for (std::size_t p = 0; p < m.size(); ++p)
            for (int e = 0; e < m[p]; ++e) v *= x[p];
        s += v;
    }
    return s;
}

Eigen::MatrixXd design_matrix(const std::vector<Orbit>& basis, const std::vector<std::vector<double>>& xs,
                              unsigned threads) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(basis.size()));
    parallel_for(xs.size(), threads, [&](std::size_t i) {
        for (std::size_t c = 0; c < basis.size(); ++c)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = orbit_value(basis[c], xs[i]);
    });
    return A;
}

double sup_error(const TransferPolynomial& p, const std::vector<InvariantVector>& q, const std::vector<double>& v,
                 unsigned threads) {
    std::vector<double> err(q.size(), 0.0);
    parallel_for(q.size(), threads, [&](std::size_t i) { err[i] = std::abs(p.evaluate(q[i]).real() - v[i]); });
    return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

} // namespace

void FitConfig::validate() const {
    if (!(E_max > 0.0)) throw InvalidArgument("fit: E_max must be positive");
    if (!(epsilon > 0.0)) throw InvalidArgument("fit: epsilon must be positive");
    if (max_degree < 0) throw InvalidArgument("fit: max_degree must be >= 0");
    if (train_count <= 0 || validate_count <= 0) throw InvalidArgument("fit: sample counts must be positive");
    if (threads == 0) throw InvalidArgument("fit: threads must be positive");
}

std::vector<FourVector> PhaseSpaceSample::momenta(std::size_t i) const {
    std::vector<FourVector> k;
    for (const auto& p : points[i]) k.push_back(p.momentum());
    return k;
}

bool qn_nonempty(int n, int r, double E_max, double mass) {
    if (r < 2 || r > n - 2) return false;
    return E_max >= std::max(r, n - r) * mass;
}

PhaseSpaceSample sample_Qn(int n, int r, const FitConfig& cfg, const ModelParams& params) {
    cfg.validate();
    params.validate();
    if (n < 3) throw InvalidArgument("sample_Qn: n must be >= 3");
    if (r < 1 || r > n - 1) throw InvalidArgument("sample_Qn: r must lie in 1..n-1");
    PhaseSpaceSample s;
    s.n = n;
    s.r = r;
    s.E_max = cfg.E_max;
    s.mass = params.m;
    if (!qn_nonempty(n, r, cfg.E_max, params.m)) {
        s.kinematically_empty = true;
        std::ostringstream os;
        os << "Q_" << n << " with " << r << " incoming legs is empty: needs 2 <= r <= n-2 and E_max >= "
           << std::max(r, n - r) << " m";
        s.diagnostics = os.str();
        return s;
    }
    std::vector<int> legs(static_cast<std::size_t>(n));
    std::iota(legs.begin(), legs.end(), 0);
    std::vector<int> signs;
    for (int l = 0; l < n; ++l) signs.push_back(l < r ? -1 : 1);
    const phase_space::ShellConstraint sc(params.d, params.m, legs, signs);

    const auto wanted = static_cast<std::size_t>(cfg.train_count + cfg.validate_count);
    const unsigned batch = std::max(1u, cfg.threads);
    std::uint64_t block = 0;
    while (s.points.size() < wanted && s.attempts < kMaxAttempts) {
        std::vector<std::vector<std::vector<ShellPoint>>> found(batch);
        parallel_for(batch, cfg.threads, [&](std::size_t b) {
            found[b] = sample_block(sc, n, r, cfg.E_max, params.m, cfg.seed, block + b);
        });
        for (auto& f : found) {
            s.attempts += kBlockAttempts;
            for (auto& p : f)
                if (s.points.size() < wanted) s.points.push_back(std::move(p));
            if (s.points.size() >= wanted) break;
        }
        block += batch;
        const double rate = static_cast<double>(s.points.size()) / static_cast<double>(s.attempts);
        if (s.attempts >= 10'000'000 && rate < 1e-6) break;
    }
    const double rate = static_cast<double>(s.points.size()) / static_cast<double>(s.attempts);
    if (rate < 1e-6) {
        std::ostringstream os;
        os << "acceptance rate " << rate << " below 1e-6 after " << s.attempts << " attempts; treated as empty";
        s.diagnostics = os.str();
        s.points.clear();
    } else if (s.points.size() < wanted) {
        std::ostringstream os;
        os << "only " << s.points.size() << " of " << wanted << " points after " << s.attempts << " attempts";
        s.diagnostics = os.str();
    }
    return s;
}

double qn_constraint_residual(std::span<const ShellPoint> point, int r, double E_max, double mass) {
    const int n = static_cast<int>(point.size());
    if (n == 0) return 0.0;
    const int sd = static_cast<int>(point[0].spatial.size());
    std::vector<double> total(static_cast<std::size_t>(sd + 1), 0.0);
    double forward = 0.0;
    double worst = 0.0;
    for (int l = 0; l < n; ++l) {
        const auto& p = point[static_cast<std::size_t>(l)];
        double p2 = 0.0;
        for (double x : p.spatial) p2 += x * x;
        const double e = (l < r ? -1.0 : 1.0) * std::sqrt(mass * mass + p2);
        // shell: the stored point must reproduce the same energy
        worst = std::max(worst, std::abs(p.energy() - e));
        worst = std::max(worst, std::abs(e * e - p2 - mass * mass) / std::max(1.0, mass * mass));
        if (p.sign != (l < r ? -1 : 1)) return std::numeric_limits<double>::infinity();
        total[0] += e;
        for (int c = 0; c < sd; ++c) total[static_cast<std::size_t>(c + 1)] += p.spatial[static_cast<std::size_t>(c)];
        if (l >= r) forward += e;
    }
    for (double t : total) worst = std::max(worst, std::abs(t));
    worst = std::max(worst, forward - E_max);
    return worst;
}

FitData make_fit_data(const ReferenceFunction& R, const PhaseSpaceSample& sample, const FitConfig& cfg) {
    cfg.validate();
    if (sample.points.size() < static_cast<std::size_t>(cfg.train_count + cfg.validate_count))
        throw InvalidArgument("fit: sample has fewer points than train_count + validate_count");
    FitData data;
    data.n = sample.n;
    const double bound = std::pow(sample.E_max + (sample.n - 1) * sample.E_max, 2);
    double qmax = sample.mass * sample.mass;
    const std::size_t total = static_cast<std::size_t>(cfg.train_count + cfg.validate_count);
    std::vector<InvariantVector> qs(total);
    std::vector<double> vs(total);
    parallel_for(total, cfg.threads, [&](std::size_t i) {
        const auto k = sample.momenta(i);
        qs[i] = invariant_map(k);
        vs[i] = R(k);
    });
    for (std::size_t i = 0; i < total; ++i) {
        for (double q : qs[i].entries) {
            if (std::abs(q) > bound) throw NumericalError("fit: invariant outside the compactness bound");
            qmax = std::max(qmax, std::abs(q));
        }
        if (!std::isfinite(vs[i])) throw InvalidArgument("fit: reference value is not finite");
        if (i < static_cast<std::size_t>(cfg.train_count)) {
            data.train.push_back(std::move(qs[i]));
            data.train_values.push_back(vs[i]);
        } else {
            data.validate.push_back(std::move(qs[i]));
            data.validate_values.push_back(vs[i]);
        }
    }
    data.q_scale = qmax;
    return data;
}

FitData load_table(const std::string& path, int n, const FitConfig& cfg, double mass) {
    cfg.validate();
    std::ifstream in(path);
    if (!in) throw InvalidArgument("fit table: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("fit table: " + path + " is empty");
    const auto header = split_csv(line);
    std::vector<std::pair<int, int>> cols;
    int value_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "value") {
            value_col = static_cast<int>(c);
            cols.emplace_back(-1, -1);
            continue;
        }
        const auto ij = parse_invariant_name(header[c]);
        if (!ij || ij->second >= n || ij->first == ij->second)
            throw InvalidArgument("fit table: line 1: bad column '" + header[c] + "'");
        cols.push_back(*ij);
    }
    if (value_col < 0) throw InvalidArgument("fit table: line 1: missing 'value' column");
    std::vector<InvariantVector> qs;
    std::vector<double> vs;
    int lineno = 1;
    double qmax = mass * mass;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw InvalidArgument("fit table: line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " fields");
        InvariantVector q;
        q.n = n;
        q.entries.assign(InvariantVector::size_for(n), 0.0);
        for (int i = 0; i < n; ++i) q.entries[InvariantVector::index(i, i)] = mass * mass;
        double v = 0.0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double x = 0.0;
            try {
                std::size_t used = 0;
                x = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw InvalidArgument("fit table: line " + std::to_string(lineno) + ": field '" + header[c] +
                                      "' is not a number");
            }
            if (static_cast<int>(c) == value_col) {
                v = x;
            } else {
                q.entries[InvariantVector::index(cols[c].first, cols[c].second)] = x;
                qmax = std::max(qmax, std::abs(x));
            }
        }
        qs.push_back(std::move(q));
        vs.push_back(v);
    }
    const std::size_t rows = qs.size();
    if (rows < 2) throw InvalidArgument("fit table: needs at least two data rows");
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);
    const double frac = static_cast<double>(cfg.train_count) / (cfg.train_count + cfg.validate_count);
    const std::size_t ntrain =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(frac * rows)), 1, rows - 1);
    FitData data;
    data.n = n;
    data.q_scale = qmax;
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t k = order[i];
        if (i < ntrain) {
            data.train.push_back(qs[k]);
            data.train_values.push_back(vs[k]);
        } else {
            data.validate.push_back(qs[k]);
            data.validate_values.push_back(vs[k]);
        }
    }
    return data;
}

FitReport fit_polynomial(const FitData& data, const FitConfig& cfg) {
    cfg.validate();
    if (data.train.empty() || data.validate.empty()) throw InvalidArgument("fit: empty training or validation set");
    const int n = data.n;
    const auto pairs = offdiagonal_pairs(n);
    std::vector<std::vector<double>> xt;
    std::vector<std::vector<double>> xv;
    for (const auto& q : data.train) xt.push_back(scaled_pairs(q, pairs, data.q_scale));
    for (const auto& q : data.validate) xv.push_back(scaled_pairs(q, pairs, data.q_scale));
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(data.train_values.data(),
                                                                static_cast<Eigen::Index>(data.train_values.size()));

    FitReport best;
    best.achieved_sup_error = std::numeric_limits<double>::infinity();
    std::vector<Orbit> basis;
    std::vector<std::pair<int, double>> history;
    for (int deg = 0; deg <= cfg.max_degree; ++deg) {
        for (auto& o : orbits_of_degree(n, deg)) basis.push_back(std::move(o));
        Eigen::MatrixXd A = design_matrix(basis, xt, cfg.threads);
        Eigen::VectorXd norms = A.colwise().norm().transpose();
        for (Eigen::Index c = 0; c < norms.size(); ++c)
            if (norms(c) == 0.0) norms(c) = 1.0;
        A = A * norms.cwiseInverse().asDiagonal();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        qr.setThreshold(1e-13);
        const Eigen::VectorXd sol = norms.cwiseInverse().asDiagonal() * qr.solve(b);

        TransferPolynomial p(n);
        for (std::size_t c = 0; c < basis.size(); ++c) {
            const double coeff = sol(static_cast<Eigen::Index>(c));
            if (coeff == 0.0) continue;
            const double unscaled = coeff / std::pow(data.q_scale, basis[c].degree);
            for (const auto& m : basis[c].members) {
                TransferPolynomial::Exponents e(InvariantVector::size_for(n), 0);
                for (std::size_t k = 0; k < pairs.size(); ++k)
                    e[InvariantVector::index(pairs[k].first, pairs[k].second)] = m[k];
                p.add_term(e, unscaled);
            }
        }
        p = symmetrize_realify(p);
        const double verr = sup_error(p, data.validate, data.validate_values, cfg.threads);
        history.emplace_back(deg, verr);
        if (verr < best.achieved_sup_error) {
            best.polynomial = p;
            best.achieved_sup_error = verr;
            best.train_sup_error = sup_error(p, data.train, data.train_values, cfg.threads);
            best.degree_used = deg;
            best.basis_size = static_cast<int>(basis.size());
            best.rank = static_cast<int>(qr.rank());
        }
        if (verr < cfg.epsilon) break;
    }
    best.history = history;
    best.train_count = static_cast<int>(data.train.size());
    best.validate_count = static_cast<int>(data.validate.size());
    best.pass = best.achieved_sup_error < cfg.epsilon;
    std::ostringstream os;
    os << (best.pass ? "reached" : "did not reach") << " epsilon " << cfg.epsilon << " (validation sup error "
       << best.achieved_sup_error << " at degree " << best.degree_used << ", " << best.validate_count
       << " validation points)";
    best.message = os.str();
    return best;
}

FitReport fit_polynomial(const ReferenceFunction& R, const PhaseSpaceSample& sample, const FitConfig& cfg) {
    return fit_polynomial(make_fit_data(R, sample, cfg), cfg);
}

TransferFamily build_family(const std::map<int, FitReport>& fits, int L_max) {
    TransferFamily fam;
    fam.L_max = L_max;
    fam.members[2] = TransferPolynomial::constant(2, 1.0);
    for (const auto& [n, f] : fits) {
        if (n == 2) throw InvalidArgument("build_family: M_2 is fixed to 1");
        if (!f.pass) throw InvalidArgument("build_family: fit for n=" + std::to_string(n) + " did not pass");
        if (f.polynomial.per_argument_degree() > L_max)
            throw InvalidArgument("build_family: fit for n=" + std::to_string(n) + " has degree " +
                                  std::to_string(f.polynomial.per_argument_degree()) + " above L_max " +
                                  std::to_string(L_max));
        fam.members[n] = f.polynomial;
    }
    const auto report = validate_transfer_family(fam);
    if (!report.pass) {
        const auto& v = report.violations.front();
        throw NumericalError("build_family: family violates " + v.clause + ": " + v.message);
    }
    return fam;
}

std::vector<std::string> reference_names() { return {"constant", "planted_quadratic", "exp_sym", "exp_q12"}; }

TransferPolynomial planted_polynomial(int n, double mass) {
    if (n < 3) throw InvalidArgument("planted polynomial needs n >= 3");
    const double m2 = mass * mass;
    const std::size_t size = InvariantVector::size_for(n);
    TransferPolynomial p(n);
    TransferPolynomial::Exponents e(size, 0);
    p.add_term(e, 1.5);
    e[InvariantVector::index(0, 1)] = 1;
    p.add_term(e, 0.25 / m2);
    e[InvariantVector::index(0, 1)] = 2;
    p.add_term(e, -0.05 / (m2 * m2));
    e[InvariantVector::index(0, 1)] = 1;
    e[InvariantVector::index(0, 2)] = 1;
    p.add_term(e, 0.02 / (m2 * m2));
    return symmetrize_realify(p);
}

ReferenceFunction make_reference(const std::string& name, int n, const ReferenceParams& p, double mass) {
    const double m2 = mass * mass;
    if (name == "constant") {
        const double c = p.value;
        return [c](std::span<const FourVector>) { return c; };
    }
    if (name == "planted_quadratic") {
        const auto poly = planted_polynomial(n, mass);
        return [poly](std::span<const FourVector> k) { return poly(k).real(); };
    }
    if (name == "exp_sym") {
        if (!(p.scale > 0.0)) throw InvalidArgument("exp_sym: scale must be positive");
        const double s = p.scale * m2;
        return [s](std::span<const FourVector> k) {
            double acc = 0.0;
            int count = 0;
            for (std::size_t j = 0; j < k.size(); ++j)
                for (std::size_t i = 0; i < j; ++i) {
                    acc += std::exp(-minkowski_dot(k[i], k[j]) / s);
                    ++count;
                }
            return acc / count;
        };
    }
    if (name == "exp_q12") {
        return [m2](std::span<const FourVector> k) { return std::exp(-minkowski_dot(k[0], k[1]) / m2); };
    }
    throw InvalidArgument("unknown reference function '" + name + "'");
}

} // namespace qftscat
