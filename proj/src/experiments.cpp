#include "pnbound/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pnbound/errors.hpp"

namespace pnbound {

const char* to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::Snr: return "snr";
    case SweepAxis::TargetRange: return "range";
    case SweepAxis::F3db: return "f3db";
    case SweepAxis::Floop: return "floop";
    }
    return "?";
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last || !std::isfinite(v))
        throw ConfigError("key '" + key + "': '" + text + "' is not a finite number");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

SweepAxis parse_axis(const std::string& text) {
    const std::string v = lower(text);
    if (v == "snr") return SweepAxis::Snr;
    if (v == "range" || v == "target_range") return SweepAxis::TargetRange;
    if (v == "f3db") return SweepAxis::F3db;
    if (v == "floop") return SweepAxis::Floop;
    throw ConfigError("sweep.axis: unknown variant '" + text + "' (expected snr|range|f3db|floop)");
}

OscillatorKind parse_kind(const std::string& text) {
    const std::string v = lower(text);
    if (v == "fro") return OscillatorKind::Fro;
    if (v == "pll") return OscillatorKind::Pll;
    throw ConfigError("osc.kind: unknown variant '" + text + "' (expected fro|pll)");
}

} // namespace

unsigned parse_families(const std::string& list) {
    unsigned f = 0;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = lower(trim(item));
        if (item.empty()) continue;
        if (item == "crb_free") f |= kFamilyCrbFree;
        else if (item == "crb") f |= kFamilyCrb;
        else if (item == "lb") f |= kFamilyLb;
        else if (item == "ml") f |= kFamilyMl;
        else throw ConfigError("unknown result family '" + item + "' (expected crb_free|crb|lb|ml)");
    }
    if (f == 0) throw ConfigError("no result family requested");
    return f;
}

std::string families_to_string(unsigned families) {
    std::vector<std::string> parts;
    if (families & kFamilyCrbFree) parts.emplace_back("crb_free");
    if (families & kFamilyCrb) parts.emplace_back("crb");
    if (families & kFamilyLb) parts.emplace_back("lb");
    if (families & kFamilyMl) parts.emplace_back("ml");
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
    return out;
}

void SweepSpec::validate() const {
    ofdm.validate();
    osc.validate();
    if (values.empty()) throw ConfigError("sweep.values is empty");
    if (!std::is_sorted(values.begin(), values.end()))
        throw ConfigError("sweep.values must be sorted ascending");
    if (n_pn_realizations == 0) throw ConfigError("mc.n_realizations must be >= 1");
    if (!(search_window_cells > 0.0)) throw ConfigError("mc.window_cells must be positive");
    if ((families & kFamilyMl) && campaign_trials == 0)
        throw ConfigError("campaign.trials must be >= 1 when the ml family is requested");
    switch (axis) {
    case SweepAxis::TargetRange:
        for (double v : values)
            if (v <= 0.0) throw ConfigError("range sweep values must be positive");
        break;
    case SweepAxis::F3db:
        for (double v : values)
            if (v <= 0.0) throw ConfigError("f3db sweep values must be positive");
        break;
    case SweepAxis::Floop:
        if (osc.kind != OscillatorKind::Pll)
            throw ConfigError("a floop sweep requires osc.kind = pll");
        for (double v : values)
            if (v <= 0.0) throw ConfigError("floop sweep values must be positive");
        break;
    case SweepAxis::Snr: break;
    }
    const TargetTruth truth = TargetTruth::from_range_velocity(range_m, velocity_mps, gain);
    if (std::norm(gain) == 0.0) throw ConfigError("target gain must be non-zero");
    if (axis == SweepAxis::TargetRange) {
        // Per-point delays are checked in run_sweep; only Doppler validity is fixed here.
        TargetTruth probe = truth;
        probe.delay_s = 0.0;
        check_model_validity(ofdm, probe);
    } else {
        check_model_validity(ofdm, truth);
    }
}

SweepSpec parse_config(const std::string& text) {
    SweepSpec spec;
    std::map<std::string, std::string> kv;
    std::vector<std::string> unknown;
    static const std::set<std::string> known{
        "ofdm.fc_hz", "ofdm.df_hz", "ofdm.n", "ofdm.m", "ofdm.tcp_s",
        "target.range_m", "target.velocity_mps", "target.gain_re", "target.gain_im",
        "osc.kind", "osc.f3db_hz", "osc.floop_hz", "snr_db",
        "mc.n_realizations", "mc.seed", "mc.symbol_seed", "mc.window_cells",
        "campaign.trials", "crb.delay_prior", "sweep.axis", "sweep.values", "sweep.families"};

    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (!known.count(key)) {
            unknown.push_back(key);
            continue;
        }
        if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'");
        kv[key] = value;
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }

    auto num = [&](const char* key, double& dst) {
        if (auto it = kv.find(key); it != kv.end()) dst = parse_double(key, it->second);
    };
    auto u64 = [&](const char* key, auto& dst) {
        if (auto it = kv.find(key); it != kv.end())
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(parse_u64(key, it->second));
    };
    num("ofdm.fc_hz", spec.ofdm.carrier_freq_hz);
    num("ofdm.df_hz", spec.ofdm.subcarrier_spacing_hz);
    u64("ofdm.n", spec.ofdm.num_subcarriers);
    u64("ofdm.m", spec.ofdm.num_symbols);
    num("ofdm.tcp_s", spec.ofdm.cp_duration_s);
    num("target.range_m", spec.range_m);
    num("target.velocity_mps", spec.velocity_mps);
    double gre = spec.gain.real(), gim = spec.gain.imag();
    num("target.gain_re", gre);
    num("target.gain_im", gim);
    spec.gain = {gre, gim};
    if (auto it = kv.find("osc.kind"); it != kv.end()) spec.osc.kind = parse_kind(it->second);
    num("osc.f3db_hz", spec.osc.f3db_hz);
    num("osc.floop_hz", spec.osc.floop_hz);
    if (spec.osc.kind == OscillatorKind::Pll && spec.osc.floop_hz <= 0.0) spec.osc.floop_hz = 1e6;
    num("snr_db", spec.snr_db);
    u64("mc.n_realizations", spec.n_pn_realizations);
    u64("mc.seed", spec.seed);
    u64("mc.symbol_seed", spec.symbol_seed);
    num("mc.window_cells", spec.search_window_cells);
    u64("campaign.trials", spec.campaign_trials);
    if (auto it = kv.find("crb.delay_prior"); it != kv.end()) {
        const std::string v = lower(it->second);
        if (v == "true" || v == "1") spec.include_delay_prior = true;
        else if (v == "false" || v == "0") spec.include_delay_prior = false;
        else throw ConfigError("crb.delay_prior: expected true|false, got '" + it->second + "'");
    }
    if (auto it = kv.find("sweep.axis"); it != kv.end()) spec.axis = parse_axis(it->second);
    if (auto it = kv.find("sweep.values"); it != kv.end())
        spec.values = parse_list("sweep.values", it->second);
    if (auto it = kv.find("sweep.families"); it != kv.end())
        spec.families = parse_families(it->second);

    spec.validate();
    return spec;
}

SweepSpec load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string to_config_text(const SweepSpec& spec) {
    std::ostringstream os;
    os << "ofdm.fc_hz = " << fmt_double(spec.ofdm.carrier_freq_hz) << "\n"
       << "ofdm.df_hz = " << fmt_double(spec.ofdm.subcarrier_spacing_hz) << "\n"
       << "ofdm.n = " << spec.ofdm.num_subcarriers << "\n"
       << "ofdm.m = " << spec.ofdm.num_symbols << "\n"
       << "ofdm.tcp_s = " << fmt_double(spec.ofdm.cp_duration_s) << "\n"
       << "target.range_m = " << fmt_double(spec.range_m) << "\n"
       << "target.velocity_mps = " << fmt_double(spec.velocity_mps) << "\n"
       << "target.gain_re = " << fmt_double(spec.gain.real()) << "\n"
       << "target.gain_im = " << fmt_double(spec.gain.imag()) << "\n"
       << "osc.kind = " << to_string(spec.osc.kind) << "\n"
       << "osc.f3db_hz = " << fmt_double(spec.osc.f3db_hz) << "\n"
       << "osc.floop_hz = " << fmt_double(spec.osc.floop_hz) << "\n"
       << "snr_db = " << fmt_double(spec.snr_db) << "\n"
       << "mc.n_realizations = " << spec.n_pn_realizations << "\n"
       << "mc.seed = " << spec.seed << "\n"
       << "mc.symbol_seed = " << spec.symbol_seed << "\n"
       << "mc.window_cells = " << fmt_double(spec.search_window_cells) << "\n"
       << "campaign.trials = " << spec.campaign_trials << "\n"
       << "crb.delay_prior = " << (spec.include_delay_prior ? "true" : "false") << "\n"
       << "sweep.axis = " << to_string(spec.axis) << "\n"
       << "sweep.values = ";
    for (std::size_t i = 0; i < spec.values.size(); ++i)
        os << (i ? "," : "") << fmt_double(spec.values[i]);
    os << "\n"
       << "sweep.families = " << families_to_string(spec.families) << "\n";
    return os.str();
}

std::string config_hash(const SweepSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : to_config_text(spec)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PointContext point_context(const SweepSpec& spec, double axis_value) {
    PointContext ctx;
    ctx.ofdm = spec.ofdm;
    ctx.osc = spec.osc;
    double range = spec.range_m;
    double snr_db = spec.snr_db;
    switch (spec.axis) {
    case SweepAxis::Snr: snr_db = axis_value; break;
    case SweepAxis::TargetRange: range = axis_value; break;
    case SweepAxis::F3db: ctx.osc.f3db_hz = axis_value; break;
    case SweepAxis::Floop: ctx.osc.floop_hz = axis_value; break;
    }
    ctx.truth = TargetTruth::from_range_velocity(range, spec.velocity_mps, spec.gain);
    ctx.noise.sigma_sq = snr_to_sigma_sq(db_to_linear(snr_db), spec.gain);
    return ctx;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec, Exec exec) {
    spec.validate();
    const SymbolGrid symbols = SymbolGrid::qpsk(spec.ofdm, spec.symbol_seed);
    const SampleTimeGrid grid(spec.ofdm);
    PseudoTrueOptions pto;
    pto.window_cells = spec.search_window_cells;

    // The prior FIM depends only on (delay, oscillator); reuse it across SNR points.
    struct PriorKey {
        double delay;
        OscillatorKind kind;
        double f3db, floop;
        bool operator==(const PriorKey&) const = default;
    };
    std::optional<PriorKey> prior_key;
    FimMatrix prior;

    std::vector<ResultRow> rows;
    for (double v : spec.values) {
        const auto t0 = std::chrono::steady_clock::now();
        ResultRow row;
        row.axis_value = v;
        std::vector<std::string> notes;
        const PointContext ctx = point_context(spec, v);

        bool model_ok = true;
        try {
            check_model_validity(ctx.ofdm, ctx.truth);
        } catch (const ModelValidityError&) {
            model_ok = false;
            notes.emplace_back("warn:delay_exceeds_cp");
        }

        auto guarded = [&](const char* name, auto&& body) {
            try {
                body();
            } catch (const std::exception& e) {
                std::string msg = e.what();
                std::replace(msg.begin(), msg.end(), ',', ';');
                std::replace(msg.begin(), msg.end(), '\n', ' ');
                notes.push_back(std::string("error:") + name + ":" + msg);
            }
        };
        const double nan = std::nan("");

        if (spec.families & kFamilyCrbFree) {
            row.crb_free_range_m = row.crb_free_vel_mps = nan;
            guarded("crb_free", [&] {
                const auto r = deterministic_crb(deterministic_fim(ctx.ofdm, symbols, ctx.truth, ctx.noise));
                row.crb_free_range_m = r.range_rmse_m;
                row.crb_free_vel_mps = r.velocity_rmse_mps;
            });
        }
        if (spec.families & kFamilyCrb) {
            row.crb_range_m = row.crb_vel_mps = nan;
            guarded("crb", [&] {
                const PriorKey key{ctx.truth.delay_s, ctx.osc.kind, ctx.osc.f3db_hz,
                                   ctx.osc.kind == OscillatorKind::Pll ? ctx.osc.floop_hz : 0.0};
                if (!prior_key || !(*prior_key == key)) {
                    prior_key.reset();
                    prior = hybrid_fim_prior(ctx.osc, grid, ctx.truth.delay_s, exec,
                                             spec.include_delay_prior);
                    prior_key = key;
                }
                const auto r = hybrid_crb(hybrid_fim_observation(ctx.ofdm, symbols, ctx.truth, ctx.noise), prior);
                row.crb_range_m = r.range_rmse_m;
                row.crb_vel_mps = r.velocity_rmse_mps;
            });
        }
        if (spec.families & kFamilyLb) {
            row.lb_range_m = row.lb_vel_mps = nan;
            row.n_real = spec.n_pn_realizations;
            guarded("lb", [&] {
                const auto r = averaged_lb(ctx.ofdm, symbols, ctx.truth, ctx.noise, ctx.osc,
                                           spec.n_pn_realizations, spec.seed, exec, pto);
                row.lb_range_m = r.lb.range_rmse_m;
                row.lb_vel_mps = r.lb.velocity_rmse_mps;
                row.n_excluded = r.n_excluded;
            });
        }
        if (spec.families & kFamilyMl) {
            row.ml_range_m = row.ml_vel_mps = nan;
            if (model_ok) {
                guarded("ml", [&] {
                    CampaignSpec cs;
                    cs.n_trials = spec.campaign_trials;
                    cs.seed = derive_seed(spec.seed, 0xC0FFEE);
                    cs.track_pseudo_true = false;
                    const auto r = rmse_campaign(ctx.ofdm, symbols, ctx.truth, ctx.noise, ctx.osc, cs, exec);
                    row.ml_range_m = r.range_rmse_m;
                    row.ml_vel_mps = r.velocity_rmse_mps;
                });
            } else {
                notes.emplace_back("skip:ml");
            }
        }

        if (!notes.empty()) {
            row.status.clear();
            for (std::size_t i = 0; i < notes.size(); ++i) row.status += (i ? ";" : "") + notes[i];
        }
        row.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> csv_columns(unsigned families) {
    std::vector<std::string> cols{"axis_value"};
    if (families & kFamilyCrbFree) cols.insert(cols.end(), {"crb_free_range_m", "crb_free_vel_mps"});
    if (families & kFamilyCrb) cols.insert(cols.end(), {"crb_range_m", "crb_vel_mps"});
    if (families & kFamilyLb) cols.insert(cols.end(), {"lb_range_m", "lb_vel_mps"});
    if (families & kFamilyMl) cols.insert(cols.end(), {"ml_range_m", "ml_vel_mps"});
    cols.insert(cols.end(), {"n_real", "n_excluded", "status"});
    return cols;
}

namespace {

std::string sci(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

} // namespace

std::string render_csv(const std::vector<ResultRow>& rows, unsigned families) {
    std::ostringstream os;
    const auto cols = csv_columns(families);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rows) {
        os << sci(r.axis_value);
        auto pair = [&](const std::optional<double>& a, const std::optional<double>& b) {
            os << "," << sci(a.value_or(std::nan(""))) << "," << sci(b.value_or(std::nan("")));
        };
        if (families & kFamilyCrbFree) pair(r.crb_free_range_m, r.crb_free_vel_mps);
        if (families & kFamilyCrb) pair(r.crb_range_m, r.crb_vel_mps);
        if (families & kFamilyLb) pair(r.lb_range_m, r.lb_vel_mps);
        if (families & kFamilyMl) pair(r.ml_range_m, r.ml_vel_mps);
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        os << "," << r.n_real << "," << r.n_excluded << "," << status << "\n";
    }
    return os.str();
}

std::string render_json(const std::vector<ResultRow>& rows, const SweepSpec& spec) {
    using nlohmann::json;
    json meta;
    json cfg = json::object();
    std::stringstream ss(to_config_text(spec));
    std::string line;
    while (std::getline(ss, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) cfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    meta["config"] = cfg;
    meta["config_hash"] = config_hash(spec);
    meta["seed"] = spec.seed;
    meta["tool_version"] = kToolVersion;
    meta["axis"] = to_string(spec.axis);
    meta["families"] = families_to_string(spec.families);

    json arr = json::array();
    auto put = [](json& o, const char* key, const std::optional<double>& v) {
        if (!v) return;
        if (std::isnan(*v)) o[key] = nullptr;
        else o[key] = *v;
    };
    for (const auto& r : rows) {
        json o;
        o["axis_value"] = r.axis_value;
        put(o, "crb_free_range_m", r.crb_free_range_m);
        put(o, "crb_free_vel_mps", r.crb_free_vel_mps);
        put(o, "crb_range_m", r.crb_range_m);
        put(o, "crb_vel_mps", r.crb_vel_mps);
        put(o, "lb_range_m", r.lb_range_m);
        put(o, "lb_vel_mps", r.lb_vel_mps);
        put(o, "ml_range_m", r.ml_range_m);
        put(o, "ml_vel_mps", r.ml_vel_mps);
        o["n_real"] = r.n_real;
        o["n_excluded"] = r.n_excluded;
        o["status"] = r.status;
        o["wall_time_s"] = r.wall_time_s;
        arr.push_back(std::move(o));
    }
    json doc;
    doc["metadata"] = meta;
    doc["rows"] = arr;
    return doc.dump(2) + "\n";
}

void emit_results(const std::vector<ResultRow>& rows, OutputFormat format,
                  const std::filesystem::path& path, const SweepSpec& spec) {
    if (rows.empty()) throw std::invalid_argument("no result rows to emit");
    const std::string body =
        format == OutputFormat::Csv ? render_csv(rows, spec.families) : render_json(rows, spec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write results to " + path.string());
    out << body;
    if (!out) throw std::runtime_error("failed while writing " + path.string());
}

} // namespace pnbound
