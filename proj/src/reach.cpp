#include "diffwarn/reach.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "diffwarn/csv.hpp"

namespace diffwarn::reach {

using nlohmann::json;

bool DiscreteFilter::accepts(std::uint64_t q) const {
    switch (kind) {
        case Kind::Any:
            return true;
        case Kind::MinActive:
            return static_cast<std::size_t>(std::popcount(q)) >= min_active;
        case Kind::BitsActive:
            return (q & required_bits) == required_bits;
        case Kind::StateSet:
            return std::find(state_set.begin(), state_set.end(), q) != state_set.end();
    }
    return false;
}

bool StateRegion::contains(std::span<const double> x) const {
    if (box && !box->contains(x)) return false;
    for (const auto& g : constraints)
        if (g.eval(x) < 0.0) return false;
    return true;
}

bool StateRegion::contains(std::span<const double> x, std::uint64_t q) const {
    return discrete.accepts(q) && contains(x);
}

const Polynomial& AltitudeCertificate::poly_for(std::uint64_t q) const {
    auto it = per_state.find(q);
    if (it != per_state.end()) return it->second;
    if (shared) return *shared;
    throw std::invalid_argument("certificate: no polynomial for discrete state " +
                                std::to_string(q));
}

void AltitudeCertificate::validate() const {
    if (!shared && per_state.empty())
        throw std::invalid_argument("certificate: no polynomials");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("certificate: gamma must lie in [0,1]");
    auto check_poly = [&](const Polynomial& p) {
        if (p.degree() > degree_bound)
            throw std::invalid_argument("certificate: polynomial degree exceeds bound");
    };
    if (shared) check_poly(*shared);
    for (const auto& [q, p] : per_state) check_poly(p);
}

namespace {

Polynomial poly_from_json(const json& j, int nvars) {
    Polynomial p(nvars);
    for (const auto& term : j) {
        std::vector<int> exps = term.at("exponents").get<std::vector<int>>();
        if (static_cast<int>(exps.size()) != nvars)
            throw std::invalid_argument("polynomial json: exponent arity mismatch");
        p.add_term(std::move(exps), term.at("coeff").get<double>());
    }
    return p;
}

json poly_to_json(const Polynomial& p) {
    json terms = json::array();
    for (const auto& t : p.terms())
        terms.push_back({{"exponents", t.exponents}, {"coeff", t.coefficient}});
    return terms;
}

}  // namespace

AltitudeCertificate certificate_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    AltitudeCertificate cert;
    cert.gamma = j.at("gamma").get<double>();
    cert.time_augmented = j.value("time_augmented", false);
    cert.degree_bound = j.value("degree_bound", 8);
    const int nvars = j.at("variables").get<int>();
    if (j.contains("shared")) cert.shared = poly_from_json(j["shared"], nvars);
    if (j.contains("states"))
        for (const auto& [key, val] : j["states"].items())
            cert.per_state[std::stoull(key)] = poly_from_json(val, nvars);
    cert.validate();
    return cert;
}

std::string certificate_to_json(const AltitudeCertificate& cert) {
    json j;
    j["gamma"] = cert.gamma;
    j["time_augmented"] = cert.time_augmented;
    j["degree_bound"] = cert.degree_bound;
    int nvars = 0;
    if (cert.shared) nvars = cert.shared->nvars();
    else if (!cert.per_state.empty()) nvars = cert.per_state.begin()->second.nvars();
    j["variables"] = nvars;
    if (cert.shared) j["shared"] = poly_to_json(*cert.shared);
    if (!cert.per_state.empty()) {
        json states;
        for (const auto& [q, p] : cert.per_state) states[std::to_string(q)] = poly_to_json(p);
        j["states"] = states;
    }
    return j.dump(2);
}

StateRegion region_from_json(const std::string& json_text, std::size_t dim) {
    const json j = json::parse(json_text);
    StateRegion r;
    if (j.contains("box")) {
        Box b;
        b.lo = j["box"].at("lo").get<std::vector<double>>();
        b.hi = j["box"].at("hi").get<std::vector<double>>();
        b.validate();
        if (b.dim() != dim)
            throw std::invalid_argument("region json: box dimension mismatch");
        r.box = std::move(b);
    }
    if (j.contains("polynomials"))
        for (const auto& pj : j["polynomials"])
            r.constraints.push_back(poly_from_json(pj, static_cast<int>(dim)));
    if (j.contains("discrete")) {
        const auto& dj = j["discrete"];
        const std::string kind = dj.at("kind").get<std::string>();
        if (kind == "any") {
            r.discrete.kind = DiscreteFilter::Kind::Any;
        } else if (kind == "min_active") {
            r.discrete.kind = DiscreteFilter::Kind::MinActive;
            r.discrete.min_active = dj.at("count").get<std::size_t>();
        } else if (kind == "bits_active") {
            r.discrete.kind = DiscreteFilter::Kind::BitsActive;
            for (auto bit : dj.at("bits").get<std::vector<int>>())
                r.discrete.required_bits |= (1ULL << bit);
        } else if (kind == "state_set") {
            r.discrete.kind = DiscreteFilter::Kind::StateSet;
            r.discrete.state_set = dj.at("states").get<std::vector<std::uint64_t>>();
        } else {
            throw std::invalid_argument("region json: unknown discrete filter " + kind);
        }
    }
    return r;
}

std::string region_to_json(const StateRegion& region) {
    json j;
    if (region.box) j["box"] = {{"lo", region.box->lo}, {"hi", region.box->hi}};
    if (!region.constraints.empty()) {
        json polys = json::array();
        for (const auto& p : region.constraints) polys.push_back(poly_to_json(p));
        j["polynomials"] = polys;
    }
    switch (region.discrete.kind) {
        case DiscreteFilter::Kind::Any:
            break;
        case DiscreteFilter::Kind::MinActive:
            j["discrete"] = {{"kind", "min_active"}, {"count", region.discrete.min_active}};
            break;
        case DiscreteFilter::Kind::BitsActive: {
            std::vector<int> bits;
            for (int b = 0; b < 64; ++b)
                if ((region.discrete.required_bits >> b) & 1ULL) bits.push_back(b);
            j["discrete"] = {{"kind", "bits_active"}, {"bits", bits}};
            break;
        }
        case DiscreteFilter::Kind::StateSet:
            j["discrete"] = {{"kind", "state_set"}, {"states", region.discrete.state_set}};
            break;
    }
    return j.dump(2);
}

namespace {

// Cached symbolic derivatives of one certificate against one system.
class GeneratorEvaluator {
  public:
    GeneratorEvaluator(const AltitudeCertificate& cert, const HybridSystem& system)
        : cert_(cert), system_(system), n_(system.dim()) {
        cert_.validate();
    }

    // x carries t as its trailing coordinate when the certificate is
    // time-augmented.
    double apply(std::span<const double> x, std::uint64_t q, std::span<const double> u,
                 std::span<const double> p) {
        const int vars = n_ + (cert_.time_augmented ? 1 : 0);
        if (static_cast<int>(x.size()) != vars)
            throw std::invalid_argument("generator: point arity mismatch");
        const Entry& e = entry(q);

        drift_buf_.resize(n_);
        system_.drift(q, x.first(n_), u, p, drift_buf_);
        double acc = 0.0;
        for (int i = 0; i < n_; ++i) acc += e.grad[i].eval(x) * drift_buf_[i];
        if (cert_.time_augmented) acc += e.time_partial.eval(x);

        const int nd = system_.noise_dim();
        diff_buf_.resize(static_cast<std::size_t>(nd) * n_);
        system_.diffusion(q, x.first(n_), p, diff_buf_);
        for (int i = 0; i < n_; ++i) {
            for (int j = i; j < n_; ++j) {
                const double hij = e.hess[hess_index(i, j)].eval(x);
                if (hij == 0.0) continue;
                double gsum = 0.0;
                for (int ch = 0; ch < nd; ++ch)
                    gsum += diff_buf_[ch * n_ + i] * diff_buf_[ch * n_ + j];
                acc += (i == j ? 0.5 : 1.0) * hij * gsum;
            }
        }

        rates_buf_.clear();
        system_.chain(q, x.first(n_), rates_buf_);
        if (!rates_buf_.empty()) {
            const double aq = e.value.eval(x);
            for (const auto& [q_next, rate] : rates_buf_) {
                const Entry& en = entry(q_next);
                acc += rate * (en.value.eval(x) - aq);
            }
        }
        return acc;
    }

    double value(std::span<const double> x, std::uint64_t q) {
        return entry(q).value.eval(x);
    }

  private:
    struct Entry {
        Polynomial value;
        std::vector<Polynomial> grad;
        std::vector<Polynomial> hess;  // upper triangle, row-major
        Polynomial time_partial;
    };

    std::size_t hess_index(int i, int j) const {
        // upper triangle of an n x n matrix
        return static_cast<std::size_t>(i) * n_ - i * (i + 1) / 2 + j;
    }

    const Entry& entry(std::uint64_t q) {
        auto it = cache_.find(q);
        if (it != cache_.end()) return it->second;
        Entry e;
        e.value = cert_.poly_for(q);
        e.grad.reserve(n_);
        for (int i = 0; i < n_; ++i) e.grad.push_back(e.value.derivative(i));
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) e.hess.push_back(e.grad[i].derivative(j));
        if (cert_.time_augmented) e.time_partial = e.value.derivative(n_);
        return cache_.emplace(q, std::move(e)).first->second;
    }

    const AltitudeCertificate& cert_;
    const HybridSystem& system_;
    int n_;
    std::map<std::uint64_t, Entry> cache_;
    std::vector<double> drift_buf_;
    std::vector<double> diff_buf_;
    std::vector<std::pair<std::uint64_t, double>> rates_buf_;
};

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                           43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101,
                           103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
                           157, 163, 167, 173, 179, 181, 191, 193, 197, 199,
                           211, 223, 227, 229, 233, 239, 241, 251, 257, 263,
                           269, 271, 277, 281, 283, 293, 307, 311};

double halton(std::size_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

}  // namespace

double generator_apply(const AltitudeCertificate& cert, const HybridSystem& system,
                       std::span<const double> x, std::uint64_t q,
                       std::span<const double> u, std::span<const double> p) {
    GeneratorEvaluator eval(cert, system);
    return eval.apply(x, q, u, p);
}

std::vector<std::vector<double>> low_discrepancy_points(const Box& box,
                                                        std::size_t count,
                                                        std::size_t skip) {
    box.validate();
    const std::size_t d = box.dim();
    if (d > std::size(kPrimes))
        throw std::invalid_argument("low discrepancy: dimension too large");
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> x(d);
        for (std::size_t v = 0; v < d; ++v)
            x[v] = box.lo[v] + (box.hi[v] - box.lo[v]) * halton(skip + i + 1, kPrimes[v]);
        pts.push_back(std::move(x));
    }
    return pts;
}

std::vector<std::vector<double>> sample_region(const StateRegion& region,
                                               const Box& fallback_box,
                                               std::size_t count,
                                               std::size_t rejection_factor) {
    const Box& box = region.box ? *region.box : fallback_box;
    box.validate();
    const std::size_t d = box.dim();
    if (d > std::size(kPrimes))
        throw std::invalid_argument("sample_region: dimension too large");
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    const std::size_t budget = count * std::max<std::size_t>(rejection_factor, 1);
    for (std::size_t i = 0; i < budget && pts.size() < count; ++i) {
        std::vector<double> x(d);
        for (std::size_t v = 0; v < d; ++v)
            x[v] = box.lo[v] + (box.hi[v] - box.lo[v]) * halton(i + 1, kPrimes[v]);
        if (region.contains(x)) pts.push_back(std::move(x));
    }
    if (pts.empty())
        throw std::invalid_argument("sample_region: region produced no sample points");
    return pts;
}

namespace {

void fold_condition(ConditionResult& cond, double margin, std::span<const double> x,
                    std::uint64_t q, double tolerance) {
    ++cond.samples;
    if (cond.samples == 1 || margin < cond.worst_margin) {
        cond.worst_margin = margin;
        cond.worst_point.assign(x.begin(), x.end());
        cond.worst_q = q;
    }
    if (margin < -tolerance) cond.pass = false;
}

}  // namespace

CheckReport check_certificate(const AltitudeCertificate& cert,
                              const HybridSystem& system, const StateRegion& x0,
                              const StateRegion& xs, const SamplePlan& plan,
                              HorizonKind horizon) {
    cert.validate();
    if (cert.time_augmented && plan.horizon <= 0.0)
        throw std::invalid_argument("check: time-augmented certificate needs plan.horizon");
    if (horizon == HorizonKind::Finite && !cert.time_augmented)
        throw std::invalid_argument("check: finite-horizon check needs a time-augmented certificate");

    const Box space = system.state_space();
    const auto qs = system.discrete_states();
    GeneratorEvaluator eval(cert, system);

    const auto x0_pts = sample_region(x0, space, plan.region_points, plan.rejection_factor);
    const auto xs_pts = sample_region(xs, space, plan.region_points, plan.rejection_factor);
    const auto space_pts = low_discrepancy_points(space, plan.space_points);

    // time samples for the augmented conditions (t=0 is always included)
    std::vector<double> t_samples = {0.0};
    if (cert.time_augmented) {
        for (int i = 1; i <= 8; ++i)
            t_samples.push_back(plan.horizon * static_cast<double>(i) / 8.0);
    }

    CheckReport report;
    report.gamma = cert.gamma;
    report.horizon = horizon;
    report.conditions.resize(4);
    report.conditions[0].name = "initial: A_q <= gamma on X0";
    report.conditions[1].name = "target: A_q >= 1 on Xs";
    report.conditions[2].name = "nonnegative: A_q >= 0 on X";
    report.conditions[3].name = "generator: BA_q <= 0 on X";

    std::vector<double> pt;
    auto with_time = [&](const std::vector<double>& x, double t) -> std::span<const double> {
        if (!cert.time_augmented) return x;
        pt.assign(x.begin(), x.end());
        pt.push_back(t);
        return pt;
    };

    for (const auto& x : x0_pts)
        for (std::uint64_t q : qs) {
            if (!x0.discrete.accepts(q)) continue;
            const auto xe = with_time(x, 0.0);
            fold_condition(report.conditions[0], cert.gamma - eval.value(xe, q), xe, q,
                           plan.tolerance);
        }

    for (const auto& x : xs_pts)
        for (std::uint64_t q : qs) {
            if (!xs.discrete.accepts(q)) continue;
            for (double t : t_samples) {
                const auto xe = with_time(x, t);
                fold_condition(report.conditions[1], eval.value(xe, q) - 1.0, xe, q,
                               plan.tolerance);
            }
        }

    for (const auto& x : space_pts)
        for (std::uint64_t q : qs)
            for (double t : t_samples) {
                const auto xe = with_time(x, t);
                fold_condition(report.conditions[2], eval.value(xe, q), xe, q,
                               plan.tolerance);
            }

    const Box u_box = system.input_space();
    const Box p_box = system.parameter_space();
    const auto u_corners =
        u_box.empty() ? std::vector<std::vector<double>>{{}} : u_box.corners();
    const auto p_corners =
        p_box.empty() ? std::vector<std::vector<double>>{{}} : p_box.corners();

    for (const auto& x : space_pts)
        for (std::uint64_t q : qs)
            for (double t : t_samples)
                for (const auto& u : u_corners)
                    for (const auto& p : p_corners) {
                        const auto xe = with_time(x, t);
                        fold_condition(report.conditions[3], -eval.apply(xe, q, u, p),
                                       xe, q, plan.tolerance);
                    }

    report.pass = true;
    for (const auto& c : report.conditions) report.pass = report.pass && c.pass;
    report.plan_descriptor =
        "halton " + std::to_string(plan.space_points) + " over X, " +
        std::to_string(plan.region_points) + " per region, tol " +
        fmt_double(plan.tolerance) + ", U corners " + std::to_string(u_corners.size()) +
        ", Par corners " + std::to_string(p_corners.size()) +
        (cert.time_augmented ? ", t grid 9 over [0,T]" : "");
    return report;
}

std::string CheckReport::text() const {
    std::string s = "certificate check (sampled evidence, not a proof)\n";
    s += "gamma: " + fmt_double(gamma) + "  horizon: " +
         (horizon == HorizonKind::Infinite ? "infinite" : "finite") + "\n";
    s += "plan: " + plan_descriptor + "\n";
    for (const auto& c : conditions) {
        s += std::string(c.pass ? "[pass] " : "[FAIL] ") + c.name +
             "  worst margin " + fmt_double(c.worst_margin) + " at q=" +
             std::to_string(c.worst_q) + " x=(";
        for (std::size_t i = 0; i < c.worst_point.size(); ++i) {
            if (i) s += ",";
            s += fmt_double(c.worst_point[i]);
        }
        s += ") over " + std::to_string(c.samples) + " samples\n";
    }
    s += pass ? "RESULT: pass (gamma is a sampled-evidence upper bound)\n"
              : "RESULT: fail\n";
    return s;
}

namespace {

// Runs fn(i) for i in [0, n) over the requested number of threads; results
// land in caller-provided storage by index, so scheduling never changes the
// outcome.
void parallel_for_index(std::uint64_t n, unsigned threads,
                        const std::function<void(std::uint64_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    const unsigned use = std::min<unsigned>(threads, std::thread::hardware_concurrency());
    for (unsigned t = 0; t < std::max(1u, use); ++t)
        pool.emplace_back([&] {
            while (true) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace

ReachEstimate mc_reach(const HybridSystem& system, const StartSampler& start,
                       const StateRegion& target, const McOptions& opts) {
    if (opts.runs == 0) throw std::invalid_argument("mc_reach: runs must be >= 1");
    if (!start) throw std::invalid_argument("mc_reach: empty start sampler");
    const double T = opts.effective_T();
    if (!(T > 0.0)) throw std::invalid_argument("mc_reach: bad horizon");

    std::vector<char> hit(opts.runs, 0);
    parallel_for_index(opts.runs, opts.threads, [&](std::uint64_t i) {
        RngStream rng(derive_seed(opts.seed, i));
        const StartPoint sp = start(rng);
        bool reached = false;
        system.run(sp.x, sp.q, T, opts.dt, rng,
                   [&](double, std::span<const double> x, std::uint64_t q) {
                       if (target.contains(x, q)) {
                           reached = true;
                           return false;
                       }
                       return true;
                   });
        hit[i] = reached ? 1 : 0;
    });

    std::uint64_t hits = 0;
    for (char h : hit) hits += h;
    ReachEstimate est;
    est.kind = ReachEstimate::Kind::McEstimate;
    est.runs = opts.runs;
    est.value = static_cast<double>(hits) / static_cast<double>(opts.runs);
    est.z = opts.z;
    est.half_width =
        opts.z * std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(opts.runs));
    est.horizon = opts.horizon;
    est.horizon_T = T;
    return est;
}

std::string ReachEstimate::csv() const {
    CsvWriter w({"kind", "value", "half_width", "z", "runs", "horizon", "horizon_T"});
    w.add_row({kind == Kind::McEstimate ? "mc_estimate" : "certified_upper_bound",
               fmt_double(value), fmt_double(half_width), fmt_double(z),
               fmt_int(static_cast<long long>(runs)),
               horizon == HorizonKind::Infinite ? "infinite-surrogate" : "finite",
               fmt_double(horizon_T)});
    return w.text();
}

PredictabilityVerdict es_predictability(
    const HybridSystem& system, const StartSampler& start, const StateRegion& xs1,
    const StateRegion& xs2, double delta, PredictabilityMethod method,
    const McOptions& opts, const AltitudeCertificate* cert1,
    const AltitudeCertificate* cert2, const StateRegion* x0_region,
    const SamplePlan* plan) {
    if (!(delta > 0.0)) throw std::invalid_argument("es_predictability: delta must be > 0");

    // sampled disjointness test on the outcome sets
    const Box space = system.state_space();
    bool continuous_overlap = false;
    for (const auto& pts : {sample_region(xs1, space, 256, 64),
                            sample_region(xs2, space, 256, 64)}) {
        for (const auto& x : pts)
            if (xs1.contains(x) && xs2.contains(x)) continuous_overlap = true;
    }
    if (continuous_overlap) {
        bool discrete_overlap = false;
        for (std::uint64_t q : system.discrete_states())
            if (xs1.discrete.accepts(q) && xs2.discrete.accepts(q)) discrete_overlap = true;
        if (discrete_overlap)
            throw std::invalid_argument("es_predictability: outcome sets overlap");
    }

    PredictabilityVerdict v;
    v.delta = delta;
    if (method == PredictabilityMethod::MonteCarlo) {
        McOptions o1 = opts;
        o1.seed = derive_seed(opts.seed, 101);
        McOptions o2 = opts;
        o2.seed = derive_seed(opts.seed, 202);
        v.gamma1 = mc_reach(system, start, xs1, o1).value;
        v.gamma2 = mc_reach(system, start, xs2, o2).value;
    } else {
        if (!cert1 || !cert2 || !x0_region || !plan)
            throw std::invalid_argument(
                "es_predictability: certificate method needs certificates, X0 and a plan");
        const CheckReport r1 =
            check_certificate(*cert1, system, *x0_region, xs1, *plan, HorizonKind::Infinite);
        const CheckReport r2 =
            check_certificate(*cert2, system, *x0_region, xs2, *plan, HorizonKind::Infinite);
        if (!r1.pass || !r2.pass)
            throw std::invalid_argument(
                "es_predictability: a certificate failed its sampled check");
        v.gamma1 = cert1->gamma;
        v.gamma2 = cert2->gamma;
    }
    v.predictable = std::abs(v.gamma1 - v.gamma2) > delta;
    return v;
}

std::size_t GridSpec::total() const {
    std::size_t t = 1;
    for (std::size_t c : cells) t *= c;
    return t;
}

std::vector<double> WarningRegion::cell_center(std::size_t index) const {
    std::vector<double> x(grid.cells.size());
    for (std::size_t d = 0; d < grid.cells.size(); ++d) {
        const std::size_t c = index % grid.cells[d];
        index /= grid.cells[d];
        const double w = (space.hi[d] - space.lo[d]) / static_cast<double>(grid.cells[d]);
        x[d] = space.lo[d] + (static_cast<double>(c) + 0.5) * w;
    }
    return x;
}

std::string WarningRegion::csv() const {
    std::vector<std::string> header = {"cell"};
    for (std::size_t d = 0; d < grid.cells.size(); ++d)
        header.push_back("center" + std::to_string(d));
    header.push_back("p_hat");
    header.push_back("flagged");
    CsvWriter w(header);
    for (std::size_t i = 0; i < p_hat.size(); ++i) {
        std::vector<std::string> row = {fmt_int(static_cast<long long>(i))};
        for (double c : cell_center(i)) row.push_back(fmt_double(c));
        row.push_back(fmt_double(p_hat[i]));
        row.push_back(flagged[i] ? "1" : "0");
        w.add_row(row);
    }
    return w.text();
}

WarningRegion warning_region(const HybridSystem& system, const StateRegion& xs,
                             double alpha, const GridSpec& grid,
                             std::uint64_t runs_per_cell, const McOptions& opts,
                             std::uint64_t q0) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("warning_region: alpha must lie in (0,1)");
    if (grid.cells.size() != static_cast<std::size_t>(system.dim()) || grid.total() == 0)
        throw std::invalid_argument("warning_region: grid must cover every dimension");

    WarningRegion out;
    out.grid = grid;
    out.space = system.state_space();
    out.alpha = alpha;
    out.p_hat.assign(grid.total(), 0.0);
    out.flagged.assign(grid.total(), 0);

    for (std::size_t cell = 0; cell < grid.total(); ++cell) {
        const std::vector<double> center = out.cell_center(cell);
        if (xs.contains(center, q0)) {
            out.p_hat[cell] = 1.0;
            out.flagged[cell] = 1;
            continue;
        }
        McOptions cell_opts = opts;
        cell_opts.runs = runs_per_cell;
        cell_opts.seed = derive_seed(opts.seed, 7777, cell);
        const auto est = mc_reach(
            system, [&](RngStream&) { return StartPoint{center, q0}; }, xs, cell_opts);
        out.p_hat[cell] = est.value;
        out.flagged[cell] = est.value >= alpha ? 1 : 0;
    }
    return out;
}

}  // namespace diffwarn::reach
