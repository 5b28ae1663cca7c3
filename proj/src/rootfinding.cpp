#include "dwg/rootfinding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include <Eigen/QR>

namespace dwg {

void ComplexWindow::check() const {
    for (double v : {re_min, re_max, im_min, im_max})
        if (!std::isfinite(v)) throw ValidationError("window bounds must be finite");
    if (!(re_max > re_min) || !(im_max > im_min)) throw ValidationError("window is empty");
}

int EigenvalueSet::total_multiplicity() const {
    int total = 0;
    for (const auto& r : roots) total += r.multiplicity;
    return total;
}

std::vector<int> n_range(int first, int last) {
    std::vector<int> out;
    for (int n = first; n <= last; ++n) out.push_back(n);
    return out;
}

bool newton_refine(const SecularSystem& system, Complex& lambda, double tol, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        const double h = 1e-7 * std::max(1.0, std::abs(lambda));
        const ScaledComplex f0 = system.determinant(lambda);
        if (f0.is_zero()) return true;
        const ScaledComplex diff = system.determinant(lambda + h) - system.determinant(lambda - h);
        if (diff.is_zero()) return false;
        Complex step = 2.0 * h * f0.ratio(diff);
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
        if (std::abs(step) > 1.0) step /= std::abs(step);
        lambda -= step;
        if (std::abs(step) < std::max(tol, 1e-14 * std::abs(lambda))) return true;
    }
    return false;
}

namespace {

struct BoundaryZero {};

constexpr double kGolden = 0.6180339887498949;

double golden_fraction(int k) {
    const double v = k * kGolden;
    return v - std::floor(v);
}

// Deterministic nudge offsets within [1e-4, 1e-2], alternating in sign.
double nudge_offset(int k) {
    const double mag = 1e-4 + (1e-2 - 1e-4) * golden_fraction(k);
    return (k % 2 == 1) ? mag : -mag;
}

struct PointLess {
    bool operator()(const Complex& a, const Complex& b) const {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    }
};

// Determinant cache and phase tracking along segments; one per worker.
class PhaseTracker {
public:
    PhaseTracker(const SecularSystem& sys, double step0) : sys_(sys), step0_(step0) {}

    ScaledComplex value(Complex z) {
        const auto it = values_.find(z);
        if (it != values_.end()) return it->second;
        const ScaledComplex f = sys_.determinant(z);
        if (f.is_zero() || !std::isfinite(f.log_scale)) throw BoundaryZero{};
        values_.emplace(z, f);
        return f;
    }

    // Continuous change of arg det from a to b.
    double track(Complex a, Complex b) {
        if (PointLess{}(b, a)) return -track(b, a);
        const auto key = std::make_pair(a, b);
        const auto it = segments_.find(key);
        if (it != segments_.end()) return it->second;
        const double len = std::abs(b - a);
        const int n = std::max(16, static_cast<int>(std::ceil(len / step0_)));
        double total = 0.0;
        Complex p = a;
        ScaledComplex fp = value(p);
        for (int k = 1; k <= n; ++k) {
            const Complex q = (k == n) ? b : a + (b - a) * (static_cast<double>(k) / n);
            const ScaledComplex fq = value(q);
            total += refine(p, fp, q, fq, 0);
            p = q;
            fp = fq;
        }
        segments_.emplace(key, total);
        return total;
    }

    int count(double x0, double x1, double y0, double y1) {
        const Complex a{x0, y0}, b{x1, y0}, c{x1, y1}, d{x0, y1};
        const double total = track(a, b) + track(b, c) + track(c, d) + track(d, a);
        const double w = total / kTwoPi;
        const double r = std::round(w);
        if (std::abs(w - r) > 0.1 || r < 0) throw BoundaryZero{};
        return static_cast<int>(r);
    }

private:
    double refine(Complex p, const ScaledComplex& fp, Complex q, const ScaledComplex& fq, int depth) {
        const double dphase = std::arg(fq.mantissa / fp.mantissa);
        const double dlog = std::abs(fq.log_abs() - fp.log_abs());
        if (std::abs(dphase) <= kPi / 4 && dlog <= 1.0) return dphase;
        if (depth > 40 || std::abs(q - p) < 1e-10 * (1.0 + std::abs(p))) throw BoundaryZero{};
        const Complex m = 0.5 * (p + q);
        const ScaledComplex fm = value(m);
        return refine(p, fp, m, fm, depth + 1) + refine(m, fm, q, fq, depth + 1);
    }

    const SecularSystem& sys_;
    double step0_;
    std::map<Complex, ScaledComplex, PointLess> values_;
    std::map<std::pair<Complex, Complex>, double, bool (*)(const std::pair<Complex, Complex>&,
                                                            const std::pair<Complex, Complex>&)>
        segments_{[](const std::pair<Complex, Complex>& u, const std::pair<Complex, Complex>& v) {
            PointLess less;
            if (less(u.first, v.first)) return true;
            if (less(v.first, u.first)) return false;
            return less(u.second, v.second);
        }};
};

struct Box {
    double x0, x1, y0, y1;
    int count;
};

struct Found {
    Complex z;
    int multiplicity;
};

class BoxSolver {
public:
    BoxSolver(const SecularSystem& sys, double step0, double tol) : sys_(sys), tracker_(sys, step0), tol_(tol) {}

    void solve(const Box& box, std::vector<Found>& out) {
        if (box.count == 0) return;
        const double w = box.x1 - box.x0, h = box.y1 - box.y0;
        const Complex center{0.5 * (box.x0 + box.x1), 0.5 * (box.y0 + box.y1)};
        if (box.count == 1) {
            Complex z = center;
            if (newton_refine(sys_, z, tol_) && inside(box, z)) {
                out.push_back({z, 1});
                return;
            }
        }
        if (std::hypot(w, h) < 10.0 * tol_) {
            Complex z = center;
            if (!newton_refine(sys_, z, tol_) || std::abs(z - center) > 10.0 * tol_) z = center;
            out.push_back({z, box.count});
            return;
        }
        for (int attempt = 0; attempt < 12; ++attempt) {
            const double sx = 0.5 + 0.02 * (golden_fraction(attempt + 1) - 0.5);
            const double sy = 0.5 + 0.02 * (golden_fraction(attempt + 7) - 0.5);
            std::vector<Box> kids;
            if (w > 2.0 * h) {
                const double xm = box.x0 + sx * w;
                kids = {{box.x0, xm, box.y0, box.y1, 0}, {xm, box.x1, box.y0, box.y1, 0}};
            } else if (h > 2.0 * w) {
                const double ym = box.y0 + sy * h;
                kids = {{box.x0, box.x1, box.y0, ym, 0}, {box.x0, box.x1, ym, box.y1, 0}};
            } else {
                const double xm = box.x0 + sx * w, ym = box.y0 + sy * h;
                kids = {{box.x0, xm, box.y0, ym, 0},
                        {xm, box.x1, box.y0, ym, 0},
                        {box.x0, xm, ym, box.y1, 0},
                        {xm, box.x1, ym, box.y1, 0}};
            }
            try {
                int sum = 0;
                for (auto& k : kids) {
                    k.count = tracker_.count(k.x0, k.x1, k.y0, k.y1);
                    sum += k.count;
                }
                if (sum != box.count) continue;
            } catch (const BoundaryZero&) {
                continue;
            }
            for (const auto& k : kids) solve(k, out);
            return;
        }
        // Splitting keeps hitting zeros: report the cluster at its Newton limit.
        Complex z = center;
        newton_refine(sys_, z, tol_);
        out.push_back({z, box.count});
    }

private:
    bool inside(const Box& b, Complex z) const {
        const double m = 10.0 * tol_;
        return z.real() >= b.x0 - m && z.real() <= b.x1 + m && z.imag() >= b.y0 - m && z.imag() <= b.y1 + m;
    }

    const SecularSystem& sys_;
    PhaseTracker tracker_;
    double tol_;
};

double initial_step(const SecularSystem& sys, const ComplexWindow& w) {
    const double L = std::max(sys.working_graph().graph.total_length(), 1e-3);
    return std::min(kPi / (8.0 * 2.0 * L), std::min(w.width(), w.height()) / 16.0);
}

struct StripPlan {
    ComplexWindow window;
    std::vector<double> lines;
    std::vector<int> counts;
};

// Places the strip lines and window sides off zeros, nudging as needed.
StripPlan plan_strips(const SecularSystem& sys, ComplexWindow w, double strip_height) {
    for (int side_attempt = 0; side_attempt < 16; ++side_attempt) {
        const double H = w.height();
        int k = std::max(1, static_cast<int>(std::ceil(H / strip_height - 1e-12)));
        auto make_lines = [&](int kk) {
            std::vector<double> ys;
            for (int i = 0; i <= kk; ++i) ys.push_back(w.im_min + H * i / kk);
            ys.back() = w.im_max;
            return ys;
        };
        std::vector<double> ys = make_lines(k);
        // Keep interior lines off the real axis, where real eigenvalues live.
        for (std::size_t i = 1; i + 1 < ys.size(); ++i)
            if (std::abs(ys[i]) < 1e-3) {
                ys = make_lines(++k);
                break;
            }
        PhaseTracker tracker(sys, initial_step(sys, w));
        std::vector<double> horiz(ys.size());
        bool restart = false;
        for (std::size_t i = 0; i < ys.size() && !restart; ++i) {
            const double y0 = ys[i];
            bool ok = false;
            for (int attempt = 0; attempt < 24 && !ok; ++attempt) {
                double y = y0;
                if (attempt > 0) {
                    double off = nudge_offset(attempt);
                    if (i == 0) off = -std::abs(off);
                    if (i + 1 == ys.size()) off = std::abs(off);
                    y = y0 + off;
                }
                try {
                    horiz[i] = tracker.track({w.re_min, y}, {w.re_max, y});
                    ys[i] = y;
                    ok = true;
                } catch (const BoundaryZero&) {
                }
            }
            if (!ok) throw SolverError("cannot place a horizontal contour line off the zeros");
        }
        w.im_min = ys.front();
        w.im_max = ys.back();
        StripPlan plan{w, ys, {}};
        try {
            for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
                const double right = tracker.track({w.re_max, ys[i]}, {w.re_max, ys[i + 1]});
                const double left = tracker.track({w.re_min, ys[i + 1]}, {w.re_min, ys[i]});
                const double total = horiz[i] + right - horiz[i + 1] + left;
                const double wn = total / kTwoPi;
                if (std::abs(wn - std::round(wn)) > 0.1 || std::round(wn) < 0) throw BoundaryZero{};
                plan.counts.push_back(static_cast<int>(std::round(wn)));
            }
            return plan;
        } catch (const BoundaryZero&) {
            restart = true;
        }
        const double off = std::abs(nudge_offset(side_attempt + 1));
        if (side_attempt % 2 == 0)
            w.re_min -= off;
        else
            w.re_max += off;
    }
    throw SolverError("argument principle: phase tracking failed on the window sides");
}

bool conjugate_symmetric(const SecularSystem& sys) {
    for (const auto& c : sys.graph().couplings)
        if ((c.matrix() - c.matrix().transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
    return true;
}

}  // namespace

int count_zeros(const SecularSystem& flower, const ComplexWindow& window, const RootOptions& opt) {
    window.check();
    if (flower.backend() != Backend::flower) throw Error("count_zeros requires the flower backend");
    const auto plan = plan_strips(flower, window, opt.strip_height);
    int total = 0;
    for (int c : plan.counts) total += c;
    return total;
}

EigenvalueSet find_roots(const SecularSystem& flower, const ComplexWindow& window, const RootOptions& opt) {
    window.check();
    if (!(opt.tol > 0.0)) throw ValidationError("tolerance must be positive");
    if (flower.backend() != Backend::flower) throw Error("find_roots requires the flower backend");
    const auto plan = plan_strips(flower, window, opt.strip_height);
    const std::size_t nstrips = plan.counts.size();
    const double step0 = initial_step(flower, plan.window);

    std::vector<std::vector<Found>> per_strip(nstrips);
    std::vector<std::string> errors(nstrips);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t s = next++; s < nstrips; s = next++) {
            try {
                BoxSolver solver(flower, step0, opt.tol);
                solver.solve({plan.window.re_min, plan.window.re_max, plan.lines[s], plan.lines[s + 1], plan.counts[s]},
                             per_strip[s]);
            } catch (const std::exception& e) {
                errors[s] = e.what();
            }
        }
    };
    const int nworkers = std::max(1, std::min<int>(opt.workers, static_cast<int>(nstrips)));
    if (nworkers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nworkers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw SolverError(e);

    std::vector<Found> found;
    for (auto& v : per_strip) found.insert(found.end(), v.begin(), v.end());

    // Merge limits closer than 100 tol.
    std::vector<Found> merged;
    for (const auto& f : found) {
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const Found& m) { return std::abs(m.z - f.z) < 100.0 * opt.tol; });
        if (it == merged.end())
            merged.push_back(f);
        else
            it->multiplicity += f.multiplicity;
    }

    if (opt.symmetrize && conjugate_symmetric(flower)) {
        const double pair_tol = 1e-6;
        for (auto& m : merged)
            if (std::abs(m.z.imag()) < 10.0 * opt.tol) m.z = {m.z.real(), 0.0};
        for (std::size_t i = 0; i < merged.size(); ++i) {
            if (merged[i].z.imag() <= 0.0) continue;
            for (std::size_t j = 0; j < merged.size(); ++j) {
                if (merged[j].z.imag() >= 0.0) continue;
                if (std::abs(merged[j].z - std::conj(merged[i].z)) < pair_tol) {
                    const Complex avg = 0.5 * (merged[i].z + std::conj(merged[j].z));
                    merged[i].z = avg;
                    merged[j].z = std::conj(avg);
                    break;
                }
            }
        }
    }

    EigenvalueSet out;
    out.window = plan.window;
    for (int c : plan.counts) out.count += c;
    for (const auto& m : merged) {
        Root r;
        r.lambda = m.z;
        r.multiplicity = m.multiplicity;
        if (opt.polish) {
            Complex z = r.lambda;
            if (newton_refine(*opt.polish, z, opt.tol) && std::abs(z - r.lambda) < 1e-6) r.lambda = z;
        }
        r.residual = flower.residual(r.lambda);
        for (const auto* sys : opt.certify) {
            double res;
            try {
                res = sys->residual(r.lambda);
            } catch (const ResonanceError&) {
                res = sys->residual(r.lambda + Complex(0.0, 1e-9));
            }
            r.backend_residual = std::max(r.backend_residual, res);
        }
        out.roots.push_back(r);
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
        if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
        return a.lambda.real() < b.lambda.real();
    });
    if (out.total_multiplicity() != out.count) {
        std::ostringstream msg;
        msg << "root finding incomplete: argument principle counts " << out.count << " zeros, refined roots account for "
            << out.total_multiplicity();
        throw SolverError(msg.str());
    }
    return out;
}

SequenceFit track_sequence(const SecularSystem& system, Complex c0_guess, const std::vector<int>& n_values,
                           double period, double tol) {
    SequenceFit fit;
    std::vector<int> used;
    std::vector<Complex> offsets;
    for (int n : n_values) {
        const Complex start = kI * (period * n) + c0_guess;
        Complex z = start;
        const bool ok = newton_refine(system, z, tol);
        fit.n.push_back(n);
        fit.lambdas.push_back(z);
        std::ostringstream why;
        if (!ok)
            why << "n = " << n << ": Newton did not converge";
        else if (std::abs(z - start) > period / 4.0)
            why << "n = " << n << ": converged " << std::abs(z - start) << " away from the guess";
        else
            for (std::size_t k = 0; k + 1 < fit.lambdas.size(); ++k)
                if (std::abs(fit.lambdas[k] - z) < 1e-6) why << "n = " << n << ": same root as n = " << fit.n[k];
        if (!why.str().empty()) {
            fit.jumps.push_back(why.str());
            continue;
        }
        used.push_back(n);
        offsets.push_back(z - kI * (period * n));
    }
    if (used.empty()) {
        fit.c0 = c0_guess;
        return fit;
    }
    if (used.size() == 1) {
        fit.c0 = offsets.front();
        return fit;
    }
    CMatrix A(static_cast<Eigen::Index>(used.size()), 2);
    CVector rhs(static_cast<Eigen::Index>(used.size()));
    for (std::size_t k = 0; k < used.size(); ++k) {
        A(static_cast<Eigen::Index>(k), 0) = 1.0;
        A(static_cast<Eigen::Index>(k), 1) = 1.0 / used[k];
        rhs(static_cast<Eigen::Index>(k)) = offsets[k];
    }
    const CVector coef = A.colPivHouseholderQr().solve(rhs);
    fit.c0 = coef(0);
    fit.c1 = coef(1);
    for (std::size_t k = 0; k < used.size(); ++k)
        fit.max_fit_error = std::max(fit.max_fit_error, std::abs(offsets[k] - fit.c0 - fit.c1 / double(used[k])));
    return fit;
}

}  // namespace dwg
