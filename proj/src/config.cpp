#include "bfssl/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "bfssl/errors.hpp"
#include "bfssl/mathutil.hpp"

namespace bfssl {

namespace {

enum class Kind { real, integer, long_integer, size, aug };

struct Entry {
    const char* key;
    Kind kind;
    std::function<void(RunConfig&, double)> set_num;
    std::function<double(const RunConfig&)> get_num;
    std::function<void(RunConfig&, Aug)> set_aug;
    std::function<Aug(const RunConfig&)> get_aug;
};

Entry num_entry(const char* key, Kind kind, std::function<void(RunConfig&, double)> set,
                std::function<double(const RunConfig&)> get) {
    return Entry{key, kind, std::move(set), std::move(get), nullptr, nullptr};
}

Entry aug_entry(const char* key, std::function<void(RunConfig&, Aug)> set,
                std::function<Aug(const RunConfig&)> get) {
    return Entry{key, Kind::aug, nullptr, nullptr, std::move(set), std::move(get)};
}

#define NUM(key, kind, field)                                              \
    num_entry(key, kind, [](RunConfig& c, double v) { c.field = v; },      \
              [](const RunConfig& c) { return static_cast<double>(c.field); })

#define NUMCAST(key, kind, field, type)                                     \
    num_entry(key, kind, [](RunConfig& c, double v) { c.field = static_cast<type>(v); }, \
              [](const RunConfig& c) { return static_cast<double>(c.field); })

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        // mobility
        NUM("v_min_kmh", Kind::real, mobility.v_min_kmh),
        NUM("v_max_kmh", Kind::real, mobility.v_max_kmh),
        NUM("v_mu_kmh", Kind::real, mobility.mu_kmh),
        NUM("v_sigma2", Kind::real, mobility.sigma2),
        NUM("turn_left", Kind::real, mobility.turn_probs[0]),
        NUM("turn_right", Kind::real, mobility.turn_probs[1]),
        NUM("turn_straight", Kind::real, mobility.turn_probs[2]),
        NUM("bs_x_m", Kind::real, mobility.bs_position_m[0]),
        NUM("bs_y_m", Kind::real, mobility.bs_position_m[1]),
        NUM("slot_duration_s", Kind::real, mobility.slot_duration_s),
        NUM("spawn_radius_m", Kind::real, mobility.spawn_radius_m),
        NUM("exit_radius_m", Kind::real, mobility.exit_radius_m),
        NUM("d_floor_m", Kind::real, mobility.d_floor_m),
        // channel
        NUM("bandwidth_hz", Kind::real, channel.bandwidth_hz),
        NUM("noise_dbm_per_hz", Kind::real, channel.noise_dbm_per_hz),
        NUM("shadow_std_db", Kind::real, channel.shadow_std_db),
        NUM("waterfall_m", Kind::real, channel.waterfall_m),
        NUM("error_cap", Kind::real, channel.error_cap),
        NUM("model_bits", Kind::real, channel.model_bits),
        NUM("p_min_dbm", Kind::real, channel.p_min_dbm),
        NUM("p_max_dbm", Kind::real, channel.p_max_dbm),
        NUMCAST("interferer_count", Kind::integer, channel.interferer_count, int),
        NUM("interferer_power_w", Kind::real, channel.interferer_power_w),
        NUM("interferer_distance_m", Kind::real, channel.interferer_distance_m),
        NUM("fast_fading_floor", Kind::real, channel.fast_fading_floor),
        // compute
        NUM("kappa", Kind::real, compute.kappa),
        NUM("cycles_per_round", Kind::real, compute.cycles_per_round),
        NUM("round_duration_s", Kind::real, compute.round_duration_s),
        NUM("t_max_trans_s", Kind::real, compute.max_trans_delay_s),
        NUM("f_min_hz", Kind::real, compute.f_min_hz),
        NUM("f_max_hz", Kind::real, compute.f_max_hz),
        // objective weights
        NUM("lambda_energy", Kind::real, weights.lambda_energy),
        NUM("lambda_delay", Kind::real, weights.lambda_delay),
        // sac
        NUMCAST("sac_hidden_layers", Kind::integer, sac.hidden_layers, int),
        NUMCAST("sac_hidden_width", Kind::integer, sac.hidden_width, int),
        NUM("sac_lr", Kind::real, sac.lr),
        NUM("sac_gamma", Kind::real, sac.gamma),
        NUM("sac_delta", Kind::real, sac.delta_soft),
        NUMCAST("sac_batch_size", Kind::integer, sac.batch_size, int),
        NUMCAST("sac_replay_capacity", Kind::size, sac.replay_capacity, std::size_t),
        NUMCAST("sac_target_every", Kind::integer, sac.target_update_every, int),
        NUM("sac_alpha_init", Kind::real, sac.alpha_init),
        NUM("sac_target_entropy", Kind::real, sac.target_entropy),
        NUM("sac_log_std_min", Kind::real, sac.log_std_min),
        NUM("sac_log_std_max", Kind::real, sac.log_std_max),
        NUM("theta1", Kind::real, theta1),
        NUM("theta2", Kind::real, theta2),
        NUM("fading_norm_div", Kind::real, fading_norm_div),
        // simco
        NUM("tau_alpha", Kind::real, simco.tau_alpha),
        NUM("tau_beta", Kind::real, simco.tau_beta),
        NUMCAST("ssl_input_dim", Kind::integer, simco.input_dim, int),
        NUMCAST("ssl_encoder_hidden", Kind::integer, simco.encoder_hidden, int),
        NUMCAST("ssl_encoder_out", Kind::integer, simco.encoder_out, int),
        NUMCAST("ssl_head_hidden", Kind::integer, simco.head_hidden, int),
        NUMCAST("ssl_embed_dim", Kind::integer, simco.embed_dim, int),
        NUMCAST("ssl_samples", Kind::integer, simco.samples_per_round, int),
        NUM("ssl_lr_initial", Kind::real, simco.lr_initial),
        NUM("ssl_lr_min", Kind::real, simco.lr_min),
        NUMCAST("ssl_lr_horizon", Kind::long_integer, simco.lr_horizon_rounds, long),
        NUM("ssl_momentum", Kind::real, simco.momentum),
        aug_entry("ssl_anchor_aug", [](RunConfig& c, Aug a) { c.simco.anchor_aug = a; },
                  [](const RunConfig& c) { return c.simco.anchor_aug; }),
        aug_entry("ssl_positive_aug", [](RunConfig& c, Aug a) { c.simco.positive_aug = a; },
                  [](const RunConfig& c) { return c.simco.positive_aug; }),
        NUM("ssl_aug_noise_std", Kind::real, simco.aug_noise_std),
        NUM("ssl_aug_mask_prob", Kind::real, simco.aug_mask_prob),
        NUMCAST("ssl_clusters", Kind::integer, simco.clusters, int),
        NUM("ssl_cluster_spread", Kind::real, simco.cluster_spread),
        // blur / corruption
        NUM("blur_coeff", Kind::real, blur_coeff),
        NUM("blur_velocity_threshold_kmh", Kind::real, blur_velocity_threshold_kmh),
        NUM("corrupt_fraction", Kind::real, corrupt_share),
        NUM("drop_threshold_kmh", Kind::real, drop_threshold_kmh),
        NUM("corrupt_blend", Kind::real, corrupt_blend),
        NUM("corrupt_noise_std", Kind::real, corrupt_noise_std),
        // pso
        NUMCAST("pso_iterations", Kind::integer, pso.max_iterations, int),
        NUM("pso_inertia", Kind::real, pso.inertia),
        NUM("pso_personal", Kind::real, pso.personal_coeff),
        NUM("pso_social", Kind::real, pso.social_coeff),
        NUM("pso_pos_min", Kind::real, pso.pos_min),
        NUM("pso_pos_max", Kind::real, pso.pos_max),
        NUMCAST("pso_swarm", Kind::integer, pso.swarm_size, int),
        // loop
        NUMCAST("vehicles", Kind::integer, vehicles, int),
        NUMCAST("episodes", Kind::integer, episodes, int),
        NUMCAST("slots", Kind::integer, slots, int),
        NUMCAST("update_every", Kind::integer, update_every, int),
        NUMCAST("updates_per_event", Kind::integer, updates_per_event, int),
        NUMCAST("warmup_slots", Kind::integer, warmup_slots, int),
        NUMCAST("seed", Kind::long_integer, seed, long),
        NUMCAST("test_slots", Kind::integer, test_slots, int),
        NUMCAST("eval_samples", Kind::integer, eval_samples, int),
    };
    return entries;
}

#undef NUM
#undef NUMCAST

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Aug parse_aug(const std::string& v) {
    if (v == "none") return Aug::none;
    if (v == "noise") return Aug::noise;
    if (v == "mask") return Aug::mask;
    throw config_error("config: augmentation must be none|noise|mask, got '" + v + "'");
}

const char* aug_name(Aug a) {
    switch (a) {
        case Aug::none: return "none";
        case Aug::noise: return "noise";
        case Aug::mask: return "mask";
    }
    return "none";
}

std::string format_number(Kind kind, double v) {
    char buf[64];
    if (kind == Kind::real) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
    } else {
        std::snprintf(buf, sizeof(buf), "%.0f", v);
    }
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    mobility.validate();
    channel.validate();
    compute.validate();
    weights.validate();
    sac.validate();
    simco.validate();
    pso.validate();
    if (vehicles < 1) throw config_error("config: vehicles must be >= 1");
    if (episodes < 1 || slots < 1) throw config_error("config: episodes and slots must be >= 1");
    if (update_every < 1) throw config_error("config: update_every must be >= 1");
    if (updates_per_event < 0) throw config_error("config: updates_per_event must be >= 0");
    if (warmup_slots < 0) throw config_error("config: warmup_slots must be >= 0");
    if (test_slots < 1) throw config_error("config: test_slots must be >= 1");
    if (eval_samples < 2) throw config_error("config: eval_samples must be >= 2");
    if (!(theta1 >= 0.0 && theta2 >= 0.0)) throw config_error("config: penalties must be >= 0");
    if (!(fading_norm_div > 0.0)) throw config_error("config: fading_norm_div must be > 0");
    if (!(corrupt_share >= 0.0 && corrupt_share <= 1.0))
        throw config_error("config: corrupt_fraction must be in [0,1]");
    if (!(blur_coeff > 0.0)) throw config_error("config: blur_coeff must be > 0");
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const Entry& e : registry()) {
        if (key != e.key) continue;
        if (e.kind == Kind::aug) {
            e.set_aug(cfg, parse_aug(value));
            return;
        }
        try {
            std::size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size())
                throw config_error("config: trailing characters in value for '" + key + "'");
            e.set_num(cfg, v);
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("config: cannot parse value '" + value + "' for key '" + key +
                               "'");
        }
        return;
    }
    throw config_error("config: unknown key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(line_no) +
                               " is not a key = value assignment");
        apply_config_entry(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg;
    apply_config_text(cfg, buf.str());
    return cfg;
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream out;
    for (const Entry& e : registry()) {
        out << e.key << " = ";
        if (e.kind == Kind::aug)
            out << aug_name(e.get_aug(cfg));
        else
            out << format_number(e.kind, e.get_num(cfg));
        out << "\n";
    }
    return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    return fnv1a64(dump_config(cfg));
}

}  // namespace bfssl
