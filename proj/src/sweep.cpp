#include "holdup/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace holdup::sweep {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<double> tenths(int from, int to) {
    std::vector<double> v;
    for (int k = from; k <= to; ++k) v.push_back(k / 10.0);
    return v;
}

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Accepts a JSON number or a "p/q" string.
double parse_real(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const auto slash = s.find('/');
        char* end = nullptr;
        if (slash == std::string::npos) {
            const double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() && *end == '\0') return v;
        } else {
            const std::string num = s.substr(0, slash);
            const std::string den = s.substr(slash + 1);
            char* e1 = nullptr;
            char* e2 = nullptr;
            const double p = std::strtod(num.c_str(), &e1);
            const double q = std::strtod(den.c_str(), &e2);
            if (!num.empty() && !den.empty() && *e1 == '\0' && *e2 == '\0' && q != 0.0) return p / q;
        }
    }
    throw ConfigError("field '" + field + "': expected a number or a \"p/q\" fraction");
}

std::vector<double> parse_real_list(const json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError("field '" + field + "': expected a list");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(parse_real(j[i], field + "[" + std::to_string(i) + "]"));
    return v;
}

template <typename T>
T get_as(const json& j, const std::string& field) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + field + "': wrong type");
    }
}

json spec_to_json(const SweepSpec& s) {
    json policies = json::array();
    for (auto p : s.policies) policies.push_back(std::string(explore::to_string(p)));
    return json{{"b", s.b},
                {"mean_theta_s", s.mean_theta_s},
                {"mean_theta_b", s.mean_theta_b},
                {"learning_rate", s.learning_rate},
                {"lambda_s_values", s.lambda_s_values},
                {"gamma_values", s.gamma_values},
                {"discount_values", s.discount_values},
                {"sd_values", s.sd_values},
                {"policies", policies},
                {"beta1", s.policy_params.beta1},
                {"beta2", s.policy_params.beta2},
                {"eps1", s.policy_params.eps1},
                {"eps2", s.policy_params.eps2},
                {"c1", s.policy_params.c1},
                {"runs", s.runs},
                {"t_learn", s.t_learn},
                {"t_eval", s.t_eval},
                {"master_seed", s.master_seed},
                {"hypothesis_tests", s.hypothesis_tests},
                {"output_dir", s.output_dir}};
}

void check_unique(const std::vector<double>& v, const std::string& field) {
    if (v.empty()) throw ConfigError("field '" + field + "': list must not be empty");
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ConfigError("field '" + field + "': duplicate value");
    }
}

econ::EconParams econ_for(const SweepSpec& spec, double lambda_s, double sd, double gamma) {
    econ::EconParams e;
    e.b = spec.b;
    e.lambda_s = lambda_s;
    e.lambda_b = 1.0 - lambda_s;
    e.mean_theta_s = spec.mean_theta_s;
    e.mean_theta_b = spec.mean_theta_b;
    e.sd_theta_s = sd;
    e.sd_theta_b = sd;
    e.gamma_share = gamma;
    return e;
}

std::string contour_name(const CellRow& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "contour_%s_ls%.4f_sd%g.csv", r.policy.c_str(), r.lambda_s, r.sd_theta);
    return buf;
}

void write_contours(const fs::path& dir, const std::vector<CellRow>& rows, std::vector<std::string>& files) {
    // group key -> rows, keeping first-appearance order
    std::vector<std::string> order;
    std::map<std::string, std::vector<const CellRow*>> groups;
    for (const auto& r : rows) {
        const std::string key = contour_name(r);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    for (const auto& key : order) {
        const auto& g = groups[key];
        std::vector<double> gammas;
        std::vector<double> discounts;
        for (const auto* r : g) {
            if (std::find(gammas.begin(), gammas.end(), r->gamma_share) == gammas.end()) gammas.push_back(r->gamma_share);
            if (std::find(discounts.begin(), discounts.end(), r->discount) == discounts.end()) {
                discounts.push_back(r->discount);
            }
        }
        std::sort(gammas.begin(), gammas.end());
        std::sort(discounts.begin(), discounts.end());
        std::ofstream out(dir / key);
        out << "metric,gamma_share";
        for (double d : discounts) out << ',' << fmt_real(d);
        out << '\n';
        const char* metrics[] = {"profit_mean", "bpi", "fpi", "spi", "verdict"};
        for (const char* metric : metrics) {
            for (double gamma : gammas) {
                out << metric << ',' << fmt_real(gamma);
                for (double d : discounts) {
                    const auto it = std::find_if(g.begin(), g.end(), [&](const CellRow* r) {
                        return r->gamma_share == gamma && r->discount == d;
                    });
                    out << ',';
                    if (it == g.end()) continue;
                    const CellRow& r = **it;
                    const std::string m = metric;
                    if (m == "profit_mean") out << fmt_real(r.profit_mean);
                    else if (m == "bpi") out << fmt_real(r.bpi);
                    else if (m == "fpi") out << fmt_real(r.fpi);
                    else if (m == "spi") out << fmt_real(r.spi);
                    else out << stats::to_string(r.verdict);
                }
                out << '\n';
            }
        }
        files.push_back(key);
    }
}

void write_manifest(const fs::path& path, const SweepSpec& spec, std::size_t cells, bool complete,
                    std::size_t failed_runs, double wall_seconds, const std::string& started_at,
                    const std::vector<std::string>& files, const std::vector<std::string>& notes) {
    json m{{"tool", "holdup"},
           {"version", kVersion},
           {"complete", complete},
           {"master_seed", spec.master_seed},
           {"cells", cells},
           {"runs_per_cell", spec.runs},
           {"failed_runs", failed_runs},
           {"started_at", started_at},
           {"wall_time_seconds", wall_seconds},
           {"files", files},
           {"notes", notes},
           {"config", spec_to_json(spec)}};
    std::ofstream out(path);
    out << m.dump(2) << '\n';
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_cell_trace(const GridCell& cell, std::size_t index, const fs::path& dir) {
    sim::RunState run = sim::init_run(cell.config, 0);
    std::vector<sim::StepRecord> trace;
    trace.reserve(static_cast<std::size_t>(cell.config.horizon()));
    for (long t = 1; t <= cell.config.horizon(); ++t) trace.push_back(sim::step(run, t, cell.config));
    const std::string stem = "cell" + std::to_string(index);
    std::ofstream tr(dir / (stem + "_run0_trace.csv"));
    sim::write_trace_csv(tr, trace);
    std::ofstream qs(dir / (stem + "_run0_qtable_seller.csv"));
    run.seller.qtable.write_csv(qs);
    std::ofstream qb(dir / (stem + "_run0_qtable_buyer.csv"));
    run.buyer.qtable.write_csv(qb);
}

}  // namespace

const char* const kCellColumns =
    "policy,lambda_s,lambda_b,sd_theta,gamma_share,discount,runs,failed_runs,baseline_gamma,cell_seed,"
    "mean_inv_s,mean_inv_b,mean_profit_s,mean_profit_b,profit_mean,profit_sd,profit_skewness,hq_star,hq_sb,"
    "fpi,spi,bpi,p_welch,p_wilcoxon,verdict";

SweepSpec SweepSpec::defaults() {
    SweepSpec s;
    s.lambda_s_values = {1.0 / 2.0, 7.0 / 12.0, 2.0 / 3.0, 3.0 / 4.0, 5.0 / 6.0};
    s.gamma_values = tenths(1, 9);
    s.discount_values = tenths(0, 9);
    s.sd_values = {0.0, 5.0, 10.0};
    s.policies = {explore::PolicyKind::boltzmann, explore::PolicyKind::epsilon_greedy, explore::PolicyKind::ucb};
    return s;
}

LoadedConfig parse_config(const std::string& text) {
    LoadedConfig out{SweepSpec::defaults(), {}};
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        out.warnings = validate(out.spec);
        return out;
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("malformed config: top level must be an object");

    SweepSpec& s = out.spec;
    for (const auto& [key, value] : j.items()) {
        if (key == "b") s.b = parse_real(value, key);
        else if (key == "mean_theta_s") s.mean_theta_s = parse_real(value, key);
        else if (key == "mean_theta_b") s.mean_theta_b = parse_real(value, key);
        else if (key == "learning_rate") s.learning_rate = parse_real(value, key);
        else if (key == "lambda_s_values") s.lambda_s_values = parse_real_list(value, key);
        else if (key == "gamma_values") s.gamma_values = parse_real_list(value, key);
        else if (key == "discount_values") s.discount_values = parse_real_list(value, key);
        else if (key == "sd_values") s.sd_values = parse_real_list(value, key);
        else if (key == "policies") {
            if (!value.is_array()) throw ConfigError("field 'policies': expected a list");
            s.policies.clear();
            for (const auto& p : value) {
                const auto kind = p.is_string() ? explore::parse_policy(p.get<std::string>()) : std::nullopt;
                if (!kind) throw ConfigError("field 'policies': unknown policy " + p.dump());
                s.policies.push_back(*kind);
            }
        }
        else if (key == "beta1") s.policy_params.beta1 = parse_real(value, key);
        else if (key == "beta2") s.policy_params.beta2 = parse_real(value, key);
        else if (key == "eps1") s.policy_params.eps1 = parse_real(value, key);
        else if (key == "eps2") s.policy_params.eps2 = parse_real(value, key);
        else if (key == "c1") s.policy_params.c1 = parse_real(value, key);
        else if (key == "runs") s.runs = get_as<std::size_t>(value, key);
        else if (key == "t_learn") s.t_learn = get_as<long>(value, key);
        else if (key == "t_eval") s.t_eval = get_as<long>(value, key);
        else if (key == "master_seed") s.master_seed = get_as<std::uint64_t>(value, key);
        else if (key == "hypothesis_tests") s.hypothesis_tests = get_as<bool>(value, key);
        else if (key == "output_dir") s.output_dir = get_as<std::string>(value, key);
        else throw ConfigError("unknown field '" + key + "'");
    }
    out.warnings = validate(s);
    return out;
}

LoadedConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<std::string> validate(const SweepSpec& spec) {
    std::vector<std::string> warnings;
    check_unique(spec.lambda_s_values, "lambda_s_values");
    check_unique(spec.gamma_values, "gamma_values");
    check_unique(spec.discount_values, "discount_values");
    check_unique(spec.sd_values, "sd_values");
    if (spec.policies.empty()) throw ConfigError("field 'policies': list must not be empty");
    for (double ls : spec.lambda_s_values) {
        if (!(ls > 0.0 && ls < 1.0)) throw ConfigError("field 'lambda_s_values': values must lie in (0,1)");
        try {
            econ::validate(econ_for(spec, ls, 0.0, 0.5));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("field 'lambda_s_values': " + std::string(e.what()));
        }
    }
    for (double g : spec.gamma_values) {
        if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("field 'gamma_values': values must lie in [0,1]");
    }
    for (double d : spec.discount_values) {
        if (!(d >= 0.0 && d < 1.0)) throw ConfigError("field 'discount_values': values must lie in [0,1)");
    }
    for (double sd : spec.sd_values) {
        if (!(sd >= 0.0)) throw ConfigError("field 'sd_values': values must be non-negative");
    }
    if (!(spec.b > 0.0)) throw ConfigError("field 'b': must be positive");
    if (!(spec.learning_rate > 0.0 && spec.learning_rate <= 1.0)) {
        throw ConfigError("field 'learning_rate': must lie in (0,1]");
    }
    if (spec.t_learn < 1) throw ConfigError("field 't_learn': must be at least 1");
    if (spec.t_eval < 1) throw ConfigError("field 't_eval': must be at least 1");
    if (spec.runs < 1) throw ConfigError("field 'runs': must be at least 1");
    if (spec.hypothesis_tests && spec.runs < 2) {
        throw ConfigError("field 'runs': hypothesis tests need at least 2 runs per cell");
    }
    try {
        explore::validate(spec.policy_params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (spec.hypothesis_tests) {
        for (double g : spec.gamma_values) {
            if (g == 0.0 || g == 1.0) {
                warnings.push_back("gamma_values contains " + fmt_real(g) +
                                   ": one division never invests, no meaningful baseline comparison possible");
            }
        }
    }
    return warnings;
}

std::uint64_t cell_seed(std::uint64_t master_seed, const CellCoords& c) {
    std::uint64_t h = derive_seed(master_seed, static_cast<std::uint64_t>(c.policy));
    h = derive_seed(h, std::bit_cast<std::uint64_t>(c.lambda_s));
    h = derive_seed(h, std::bit_cast<std::uint64_t>(c.sd));
    h = derive_seed(h, std::bit_cast<std::uint64_t>(c.discount));
    return derive_seed(h, std::bit_cast<std::uint64_t>(c.gamma_share));
}

ExpandedGrid expand_grid(const SweepSpec& spec) {
    validate(spec);
    ExpandedGrid grid;
    for (auto policy : spec.policies) {
        for (double ls : spec.lambda_s_values) {
            const double optimal = econ::gamma_second_best(econ_for(spec, ls, 0.0, 0.5));
            const auto nearest = std::min_element(spec.gamma_values.begin(), spec.gamma_values.end(),
                                                  [&](double x, double y) {
                                                      return std::abs(x - optimal) < std::abs(y - optimal);
                                                  });
            const double baseline_gamma = *nearest;
            const std::size_t baseline_offset = static_cast<std::size_t>(nearest - spec.gamma_values.begin());
            if (std::abs(baseline_gamma - optimal) > 1e-9 && policy == spec.policies.front()) {
                grid.notes.push_back("lambda_s=" + fmt_real(ls) + ": optimal share " + fmt_real(optimal) +
                                     " is not on the grid; baseline uses " + fmt_real(baseline_gamma));
            }
            for (double sd : spec.sd_values) {
                for (double discount : spec.discount_values) {
                    const std::size_t first = grid.cells.size();
                    for (double gamma : spec.gamma_values) {
                        GridCell cell;
                        cell.coords = {policy, ls, sd, discount, gamma};
                        cell.cell_seed = cell_seed(spec.master_seed, cell.coords);
                        cell.baseline = first + baseline_offset;
                        cell.baseline_gamma = baseline_gamma;
                        auto& cfg = cell.config;
                        cfg.econ = econ_for(spec, ls, sd, gamma);
                        cfg.discount = discount;
                        cfg.learning_rate = spec.learning_rate;
                        cfg.policy = spec.policy_params;
                        cfg.policy.kind = policy;
                        cfg.policy.learn_horizon = spec.t_learn;
                        cfg.t_learn = spec.t_learn;
                        cfg.t_eval = spec.t_eval;
                        cfg.runs = spec.runs;
                        cfg.master_seed = cell.cell_seed;
                        grid.cells.push_back(std::move(cell));
                    }
                }
            }
        }
    }
    return grid;
}

void write_cells_csv(std::ostream& out, const std::vector<CellRow>& rows) {
    out << kCellColumns << '\n';
    for (const auto& r : rows) {
        out << r.policy << ',' << fmt_real(r.lambda_s) << ',' << fmt_real(r.lambda_b) << ',' << fmt_real(r.sd_theta)
            << ',' << fmt_real(r.gamma_share) << ',' << fmt_real(r.discount) << ',' << r.runs << ',' << r.failed_runs
            << ',' << fmt_real(r.baseline_gamma) << ',' << r.cell_seed << ',' << fmt_real(r.mean_inv_s) << ','
            << fmt_real(r.mean_inv_b) << ',' << fmt_real(r.mean_profit_s) << ',' << fmt_real(r.mean_profit_b) << ','
            << fmt_real(r.profit_mean) << ',' << fmt_real(r.profit_sd) << ',' << fmt_real(r.profit_skewness) << ','
            << fmt_real(r.hq_star) << ',' << fmt_real(r.hq_sb) << ',' << fmt_real(r.fpi) << ',' << fmt_real(r.spi)
            << ',' << fmt_real(r.bpi) << ',' << fmt_real(r.p_welch) << ',' << fmt_real(r.p_wilcoxon) << ','
            << stats::to_string(r.verdict) << '\n';
    }
}

std::vector<CellRow> read_cells_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCellColumns) throw std::runtime_error("cells csv: unexpected header");
    std::vector<CellRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 25) throw std::runtime_error("cells csv: wrong field count on line " + std::to_string(line_no));
        auto real = [&](std::size_t i) {
            char* end = nullptr;
            const double v = std::strtod(f[i].c_str(), &end);
            if (end == f[i].c_str() || *end != '\0') {
                throw std::runtime_error("cells csv: bad number on line " + std::to_string(line_no));
            }
            return v;
        };
        auto count = [&](std::size_t i) { return static_cast<std::size_t>(std::stoull(f[i])); };
        CellRow r;
        r.policy = f[0];
        r.lambda_s = real(1);
        r.lambda_b = real(2);
        r.sd_theta = real(3);
        r.gamma_share = real(4);
        r.discount = real(5);
        r.runs = count(6);
        r.failed_runs = count(7);
        r.baseline_gamma = real(8);
        r.cell_seed = std::stoull(f[9]);
        r.mean_inv_s = real(10);
        r.mean_inv_b = real(11);
        r.mean_profit_s = real(12);
        r.mean_profit_b = real(13);
        r.profit_mean = real(14);
        r.profit_sd = real(15);
        r.profit_skewness = real(16);
        r.hq_star = real(17);
        r.hq_sb = real(18);
        r.fpi = real(19);
        r.spi = real(20);
        r.bpi = real(21);
        r.p_welch = real(22);
        r.p_wilcoxon = real(23);
        const auto v = stats::parse_verdict(f[24]);
        if (!v) throw std::runtime_error("cells csv: bad verdict on line " + std::to_string(line_no));
        r.verdict = *v;
        rows.push_back(std::move(r));
    }
    return rows;
}

SweepOutcome run_sweep(const SweepSpec& spec, const ExecuteOptions& opts, const std::optional<fs::path>& trace_dir) {
    SweepOutcome outcome;
    outcome.grid = expand_grid(spec).cells;
    const auto& cells = outcome.grid;
    outcome.rows.resize(cells.size());

    std::size_t group_begin = 0;
    while (group_begin < cells.size()) {
        std::size_t group_end = group_begin + 1;
        while (group_end < cells.size() && cells[group_end].baseline == cells[group_begin].baseline) ++group_end;

        const std::size_t runs = spec.runs;
        const std::size_t n_cells = group_end - group_begin;
        std::vector<std::vector<sim::RunResult>> results(n_cells, std::vector<sim::RunResult>(runs));
        sim::parallel_for(n_cells * runs, opts.jobs, [&](std::size_t unit) {
            const std::size_t c = unit / runs;
            const std::size_t r = unit % runs;
            results[c][r] = sim::run_episode(cells[group_begin + c].config, r);
        });

        // per-run headquarters profit samples of successful runs
        std::vector<std::vector<double>> profits(n_cells);
        for (std::size_t c = 0; c < n_cells; ++c) {
            for (const auto& rr : results[c]) {
                if (rr.ok) profits[c].push_back(rr.mean_profit_hq);
            }
        }
        const std::size_t base_local = cells[group_begin].baseline - group_begin;

        for (std::size_t c = 0; c < n_cells; ++c) {
            const GridCell& cell = cells[group_begin + c];
            CellRow& row = outcome.rows[group_begin + c];
            row.policy = std::string(explore::to_string(cell.coords.policy));
            row.lambda_s = cell.config.econ.lambda_s;
            row.lambda_b = cell.config.econ.lambda_b;
            row.sd_theta = cell.coords.sd;
            row.gamma_share = cell.coords.gamma_share;
            row.discount = cell.coords.discount;
            row.runs = runs;
            row.baseline_gamma = cell.baseline_gamma;
            row.cell_seed = cell.cell_seed;
            std::size_t ok = 0;
            for (const auto& rr : results[c]) {
                if (!rr.ok) {
                    ++row.failed_runs;
                    if (opts.progress) *opts.progress << "  run " << rr.run_index << " failed: " << rr.error << '\n';
                    continue;
                }
                ++ok;
                row.mean_inv_s += rr.mean_inv_s;
                row.mean_inv_b += rr.mean_inv_b;
                row.mean_profit_s += rr.mean_profit_s;
                row.mean_profit_b += rr.mean_profit_b;
            }
            outcome.failed_runs += row.failed_runs;
            row.hq_star = econ::first_best(cell.config.econ).profit_hq;
            row.hq_sb = econ::second_best(cell.config.econ).profit_hq;
            const double nan = std::nan("");
            row.p_welch = nan;
            row.p_wilcoxon = nan;
            row.verdict = stats::Verdict::neither;
            if (ok == 0) {
                row.mean_inv_s = row.mean_inv_b = row.mean_profit_s = row.mean_profit_b = nan;
                row.profit_mean = row.profit_sd = row.profit_skewness = nan;
                row.fpi = row.spi = row.bpi = nan;
                continue;
            }
            const double n_ok = static_cast<double>(ok);
            row.mean_inv_s /= n_ok;
            row.mean_inv_b /= n_ok;
            row.mean_profit_s /= n_ok;
            row.mean_profit_b /= n_ok;
            const auto summary = stats::summarize(profits[c]);
            row.profit_mean = summary.mean;
            row.profit_sd = summary.sd;
            row.profit_skewness = summary.skewness;
            const auto& base = profits[base_local];
            if (base.empty()) {
                const auto ind = stats::indicators(row.profit_mean, row.hq_star, row.hq_sb, 1.0);
                row.fpi = ind.fpi;
                row.spi = ind.spi;
                row.bpi = nan;
                continue;
            }
            if (spec.hypothesis_tests && profits[c].size() >= 2 && base.size() >= 2) {
                const auto sc = stats::build_sweep_cell(profits[c], base, cell.config.econ, cell.coords.discount);
                row.fpi = sc.fpi;
                row.spi = sc.spi;
                row.bpi = sc.bpi;
                row.p_welch = sc.p_welch;
                row.p_wilcoxon = sc.p_wilcoxon;
                row.verdict = sc.verdict;
            } else {
                const double base_mean = stats::summarize(base).mean;
                const auto ind = stats::indicators(row.profit_mean, row.hq_star, row.hq_sb, base_mean);
                row.fpi = ind.fpi;
                row.spi = ind.spi;
                row.bpi = ind.bpi;
            }
        }

        if (trace_dir) {
            for (std::size_t c = group_begin; c < group_end; ++c) write_cell_trace(cells[c], c, *trace_dir);
        }
        if (opts.progress) {
            for (std::size_t c = group_begin; c < group_end; ++c) {
                const auto& r = outcome.rows[c];
                char buf[256];
                std::snprintf(buf, sizeof buf,
                              "[%zu/%zu] %s lambda_s=%.4f sd=%g discount=%.2f share=%.2f: profit=%.3f bpi=%+.4f %s\n",
                              c + 1, cells.size(), r.policy.c_str(), r.lambda_s, r.sd_theta, r.discount,
                              r.gamma_share, r.profit_mean, r.bpi, std::string(stats::to_string(r.verdict)).c_str());
                *opts.progress << buf << std::flush;
            }
        }
        group_begin = group_end;
    }
    return outcome;
}

int execute(const SweepSpec& spec, const ExecuteOptions& opts, std::ostream& err) {
    ExpandedGrid grid;
    try {
        for (const auto& w : validate(spec)) err << "warning: " << w << '\n';
        grid = expand_grid(spec);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    for (const auto& n : grid.notes) err << "note: " << n << '\n';

    const fs::path dir = spec.output_dir;
    const fs::path manifest = dir / "manifest.json";
    const fs::path marker = dir / "INCOMPLETE";
    const std::string started_at = utc_timestamp();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fs::create_directories(dir);
        if (opts.trace) fs::create_directories(dir / "traces");
        std::ofstream(marker) << "sweep started " << started_at << '\n';
        write_manifest(manifest, spec, grid.cells.size(), false, 0, 0.0, started_at, {}, grid.notes);

        const SweepOutcome outcome =
            run_sweep(spec, opts, opts.trace ? std::optional<fs::path>(dir / "traces") : std::nullopt);

        std::vector<std::string> files{"cells.csv"};
        {
            std::ofstream out(dir / "cells.csv");
            write_cells_csv(out, outcome.rows);
            if (!out) throw std::runtime_error("failed writing cells.csv");
        }
        write_contours(dir, outcome.rows, files);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(manifest, spec, grid.cells.size(), true, outcome.failed_runs, wall, started_at, files,
                       grid.notes);
        fs::remove(marker);
        if (outcome.failed_runs > 0) {
            err << "error: " << outcome.failed_runs << " run(s) failed; see progress output\n";
            return 2;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

std::vector<GroupSummary> summarize_rows(const std::vector<CellRow>& rows) {
    std::vector<GroupSummary> out;
    std::vector<std::vector<stats::GammaWeight>> weights;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const GroupSummary& g) {
            return g.policy == r.policy && g.lambda_s == r.lambda_s && g.sd_theta == r.sd_theta;
        });
        if (it == out.end()) {
            out.push_back({r.policy, r.lambda_s, r.sd_theta, 0, 0, 0, 0, std::nullopt});
            weights.emplace_back();
            it = out.end() - 1;
        }
        auto& g = *it;
        ++g.cells;
        g.welch_significant += (r.verdict == stats::Verdict::both_significant || r.verdict == stats::Verdict::welch_only);
        g.wilcoxon_significant +=
            (r.verdict == stats::Verdict::both_significant || r.verdict == stats::Verdict::wilcoxon_only);
        g.both_significant += (r.verdict == stats::Verdict::both_significant);
        weights[static_cast<std::size_t>(it - out.begin())].push_back({r.gamma_share, r.bpi, r.verdict});
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].weighted_gamma = stats::weighted_gamma_mean(weights[i]);
    return out;
}

const std::vector<ReferenceRow>& reference_rows() {
    // lambda_s per row in table order (shares 0.1 .. 0.9)
    static const double ls[9] = {5.0 / 6, 3.0 / 4, 2.0 / 3, 7.0 / 12, 1.0 / 2, 5.0 / 12, 1.0 / 3, 1.0 / 4, 1.0 / 6};
    static const std::vector<ReferenceRow> rows = [] {
        const double fb[9][6] = {{10, 50, 8.33, 0, 166.67, 166.67},
                                 {8, 24, 6, 19.2, 100.8, 120},
                                 {8, 16, 5.33, 29.87, 76.8, 106.67},
                                 {8.70, 12.17, 5.07, 39.70, 61.75, 101.45},
                                 {10, 10, 5, 50, 50, 100},
                                 {12.17, 8.70, 5.07, 61.75, 39.70, 101.45},
                                 {16, 8, 5.33, 76.8, 29.87, 106.67},
                                 {24, 8, 6, 100.8, 19.2, 120},
                                 {50, 10, 8.33, 166.67, 0, 166.67}};
        const double sb[9][6] = {{0.74, 33.33, 6.17, 22.63, 113.17, 135.80},
                                 {1.25, 15, 4.69, 25.78, 77.34, 103.13},
                                 {1.90, 8.89, 4.23, 31.04, 62.08, 93.12},
                                 {2.78, 5.83, 4.05, 37.13, 51.99, 89.12},
                                 {4, 4, 4, 44, 44, 88},
                                 {5.83, 2.78, 4.05, 51.99, 37.13, 89.12},
                                 {8.89, 1.90, 4.23, 62.08, 31.04, 93.12},
                                 {15, 1.25, 4.69, 77.34, 25.78, 103.13},
                                 {33.33, 0.74, 6.17, 113.17, 22.63, 135.80}};
        std::vector<ReferenceRow> v;
        for (int block = 0; block < 2; ++block) {
            for (int i = 0; i < 9; ++i) {
                const double* p = block == 0 ? fb[i] : sb[i];
                v.push_back({block == 0, (i + 1) / 10.0, ls[i], 1.0 - ls[i], p[0], p[1], p[2], p[3], p[4], p[5]});
            }
        }
        return v;
    }();
    return rows;
}

std::vector<TableCheck> verify_tables(double tolerance) {
    std::vector<TableCheck> out;
    for (const auto& row : reference_rows()) {
        econ::EconParams e;
        e.lambda_s = row.lambda_s;
        e.lambda_b = row.lambda_b;
        e.gamma_share = row.gamma;
        TableCheck check{row, row.first_best ? econ::first_best(e) : econ::second_best(e), 0.0, false};
        const auto& c = check.computed;
        const double diffs[6] = {c.inv_s - row.inv_s,       c.inv_b - row.inv_b,       c.quantity - row.quantity,
                                 c.profit_s - row.profit_s, c.profit_b - row.profit_b, c.profit_hq - row.profit_hq};
        for (double d : diffs) check.max_abs_error = std::max(check.max_abs_error, std::abs(d));
        // printed values are rounded half-up, so an error of exactly half a unit is allowed
        check.pass = check.max_abs_error <= tolerance + 1e-9;
        out.push_back(check);
    }
    return out;
}

void print_table_checks(std::ostream& out, const std::vector<TableCheck>& checks) {
    char buf[256];
    for (const auto& ch : checks) {
        const auto& c = ch.computed;
        std::snprintf(buf, sizeof buf,
                      "%-11s share=%.1f lambda_s=%.4f  I_S=%8.3f I_B=%8.3f q=%6.3f Pi_S=%8.3f Pi_B=%8.3f "
                      "Pi_HQ=%8.3f  max_err=%.4f  %s\n",
                      ch.expected.first_best ? "first-best" : "second-best", ch.expected.gamma, ch.expected.lambda_s,
                      c.inv_s, c.inv_b, c.quantity, c.profit_s, c.profit_b, c.profit_hq, ch.max_abs_error,
                      ch.pass ? "PASS" : "FAIL");
        out << buf;
    }
}

}  // namespace holdup::sweep
