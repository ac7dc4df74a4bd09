#include "bfssl/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bfssl/errors.hpp"

namespace bfssl {

void ObjectiveWeights::validate() const {
    if (lambda_energy < 0.0 || lambda_energy > 1.0 || lambda_delay < 0.0 ||
        lambda_delay > 1.0 || std::abs(lambda_energy + lambda_delay - 1.0) > 1e-12) {
        throw config_error("weights: lambda values must lie in [0,1] and sum to 1");
    }
}

void AllocationAction::validate(const ChannelConfig& ch, const ComputeConfig& comp) const {
    if (powers_w.size() != frequencies_hz.size() || powers_w.size() != betas.size())
        throw constraint_error("action: mismatched vector lengths");
    double beta_sum = 0.0;
    for (std::size_t n = 0; n < powers_w.size(); ++n) {
        if (powers_w[n] < ch.p_min_w() || powers_w[n] > ch.p_max_w())
            throw constraint_error("action: power " + std::to_string(powers_w[n]) +
                                   " W outside [p_min, p_max] for vehicle " + std::to_string(n));
        if (frequencies_hz[n] < comp.f_min_hz || frequencies_hz[n] > comp.f_max_hz)
            throw constraint_error("action: frequency outside [f_min, f_max] for vehicle " +
                                   std::to_string(n));
        if (!(betas[n] > 0.0 && betas[n] < 1.0 + 1e-9))
            throw constraint_error("action: beta outside (0,1) for vehicle " + std::to_string(n));
        beta_sum += betas[n];
    }
    if (beta_sum > 1.0 + 1e-9)
        throw constraint_error("action: bandwidth shares sum to " + std::to_string(beta_sum) +
                               " > 1");
}

NotationABCEF notations(double p_w, double gain, double interference_w,
                        const ObjectiveWeights& weights, const ChannelConfig& ch,
                        const ComputeConfig& comp) {
    double sinr = p_w * gain / (interference_w + ch.noise_floor_w());
    double log_term = std::log1p(sinr);
    if (!(log_term > 0.0)) throw link_error("degenerate link: zero SINR in notations");

    NotationABCEF n;
    double denom = ch.bandwidth_hz * log_term;
    n.A = weights.lambda_energy * p_w * ch.model_bits / denom;
    n.B = weights.lambda_energy * comp.kappa * (comp.round_duration_s - comp.max_trans_delay_s);
    n.C = weights.lambda_energy * comp.kappa * comp.cycles_per_round;
    n.E = weights.lambda_delay * ch.model_bits / denom;
    n.F = weights.lambda_delay * comp.cycles_per_round;
    return n;
}

double kkt_tau(double f_hz, const NotationABCEF& n) {
    double f3 = f_hz * f_hz * f_hz;
    return f3 * (3.0 * n.B * f_hz - 2.0 * n.C) / n.F;
}

KktBetaResult kkt_beta(std::span<const NotationABCEF> notes, std::span<const double> freqs_hz) {
    if (notes.empty() || notes.size() != freqs_hz.size())
        throw internal_error("kkt_beta: empty or mismatched inputs");

    const double radicand_floor = 1e-18;
    KktBetaResult result;
    result.betas.resize(notes.size());
    double sum = 0.0;
    bool any_positive = false;
    for (std::size_t i = 0; i < notes.size(); ++i) {
        double radicand = notes[i].A + kkt_tau(freqs_hz[i], notes[i]) * notes[i].E;
        if (radicand > 0.0) any_positive = true;
        if (radicand < radicand_floor) {
            radicand = radicand_floor;
            ++result.clamped;
        }
        result.betas[i] = std::sqrt(radicand);
        sum += result.betas[i];
    }
    if (!any_positive) throw link_error("kkt_beta: degenerate instance, all radicands zero");
    for (double& b : result.betas) b /= sum;
    return result;
}

double reduced_objective(std::span<const NotationABCEF> notes, std::span<const double> freqs_hz,
                         std::span<const double> betas) {
    double sum = 0.0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < notes.size(); ++i) {
        double f = freqs_hz[i];
        sum += notes[i].A / betas[i] + notes[i].B * f * f * f - notes[i].C * f * f;
        worst = std::max(worst, notes[i].E / betas[i] + notes[i].F / f);
    }
    return sum + worst;
}

std::pair<double, CostBreakdown> objective(const AllocationAction& action,
                                           std::span<const ChannelRealization> realizations,
                                           const ObjectiveWeights& weights,
                                           const ChannelConfig& ch, const ComputeConfig& comp) {
    action.validate(ch, comp);
    if (realizations.size() != action.powers_w.size())
        throw internal_error("objective: realization count does not match action");

    std::size_t n_veh = action.powers_w.size();
    CostBreakdown bd;
    bd.trans_delay_s.resize(n_veh);
    bd.trans_energy_j.resize(n_veh);
    bd.comp_delay_s.resize(n_veh);
    bd.comp_energy_j.resize(n_veh);
    bd.iterations.resize(n_veh);

    for (std::size_t n = 0; n < n_veh; ++n) {
        auto [t_delay, t_energy] =
            transmission_delay_energy(action.powers_w[n], realizations[n].gain,
                                      realizations[n].interference_w, action.betas[n], ch);
        double f = action.frequencies_hz[n];
        bd.trans_delay_s[n] = t_delay;
        bd.trans_energy_j[n] = t_energy;
        bd.comp_delay_s[n] = compute_delay(f, comp);
        bd.iterations[n] = iteration_count(f, comp);
        bd.comp_energy_j[n] = bd.iterations[n] * compute_energy_per_iter(f, comp);
        bd.total_energy_j += t_energy + bd.comp_energy_j[n];
        bd.max_delay_s = std::max(bd.max_delay_s, t_delay + bd.comp_delay_s[n]);
    }
    bd.objective = weights.lambda_energy * bd.total_energy_j + weights.lambda_delay * bd.max_delay_s;
    return {bd.objective, bd};
}

void project_simplex(std::span<double> x, double floor) {
    // Shift so the constraint becomes z >= 0, sum z = s, then apply the usual
    // sort-and-threshold projection.
    std::size_t n = x.size();
    double s = 1.0 - floor * static_cast<double>(n);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] - floor;

    std::vector<double> sorted(z);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumulative = 0.0;
    double threshold = (std::accumulate(z.begin(), z.end(), 0.0) - s) /
                       static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        cumulative += sorted[k];
        double t = (cumulative - s) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) threshold = t;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = floor + std::max(z[i] - threshold, 0.0);
}

namespace {

// Subgradient of reduced_objective at beta (gradient of the active max term).
void reduced_subgradient(std::span<const NotationABCEF> notes, std::span<const double> freqs_hz,
                         std::span<const double> betas, std::span<double> grad) {
    std::size_t argmax = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < notes.size(); ++i) {
        double v = notes[i].E / betas[i] + notes[i].F / freqs_hz[i];
        if (v > worst) {
            worst = v;
            argmax = i;
        }
    }
    for (std::size_t i = 0; i < notes.size(); ++i) {
        grad[i] = -notes[i].A / (betas[i] * betas[i]);
        if (i == argmax) grad[i] -= notes[i].E / (betas[i] * betas[i]);
    }
}

}  // namespace

OracleResult oracle_beta(std::span<const NotationABCEF> notes, std::span<const double> freqs_hz,
                         const OracleConfig& cfg, Rng& rng) {
    std::size_t n = notes.size();
    OracleResult best;
    best.value = std::numeric_limits<double>::infinity();

    std::vector<double> x(n), candidate(n), grad(n);
    for (int restart = 0; restart < cfg.restarts; ++restart) {
        if (restart == 0) {
            std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(n));
        } else {
            double total = 0.0;
            for (double& xi : x) {
                xi = rng.exponential();
                total += xi;
            }
            for (double& xi : x) xi /= total;
            project_simplex(x, cfg.beta_floor);
        }

        double fx = reduced_objective(notes, freqs_hz, x);
        double step = 1.0;
        bool converged = false;
        for (int iter = 0; iter < cfg.max_iterations; ++iter) {
            reduced_subgradient(notes, freqs_hz, x, grad);
            bool accepted = false;
            for (int halving = 0; halving < 50; ++halving) {
                for (std::size_t i = 0; i < n; ++i) candidate[i] = x[i] - step * grad[i];
                project_simplex(candidate, cfg.beta_floor);
                double fc = reduced_objective(notes, freqs_hz, candidate);
                if (fc < fx) {
                    double move = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        move = std::max(move, std::abs(candidate[i] - x[i]));
                    x = candidate;
                    fx = fc;
                    step *= 2.0;
                    accepted = true;
                    if (move < cfg.tolerance) converged = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted || converged) {
                converged = true;
                break;
            }
        }
        if (fx < best.value) {
            best.value = fx;
            best.betas = x;
            best.converged = converged;
        }
    }
    return best;
}

}  // namespace bfssl
