// micg command line. exit: 0 ok, 2 bad input, 3 io, 4 numerical

#include "micg/micg.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace micg;

namespace {

struct RunInfo {
    std::string config_hash;
    std::uint64_t seed = 1;

    std::string csv_header() const {
        return std::string("# micg ") + micg::version + " config=" + config_hash + " seed=" + std::to_string(seed) +
               "\n";
    }

    /// SVG with the metadata comment after the XML declaration.
    std::string svg(const std::string &doc) const {
        const auto eol = doc.find('\n');
        return doc.substr(0, eol + 1) + "<!-- micg " + micg::version + " config=" + config_hash +
               " seed=" + std::to_string(seed) + " -->\n" + doc.substr(eol + 1);
    }
};

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Hash of the invoked command path and its options, output locations excluded.
std::string config_hash(const CLI::App *leaf) {
    std::vector<std::string> parts;
    for (const CLI::App *app = leaf; app != nullptr; app = app->get_parent()) {
        parts.push_back("@" + app->get_name());
        for (const CLI::Option *opt : app->get_options()) {
            const std::string name = opt->get_name();
            if (name == "--out" || name == "--out-dir" || name == "--seed" || name == "--config" || name == "--help" ||
                opt->count() == 0) {
                continue;
            }
            std::string v = name + "=";
            for (const auto &r : opt->results()) {
                v += r + ";";
            }
            parts.push_back(v);
        }
    }
    std::sort(parts.begin(), parts.end());
    std::string canon;
    for (const auto &p : parts) {
        canon += p + '\n';
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return buf;
}

std::uint64_t resolve_seed(const CLI::Option *opt, std::uint64_t value) {
    if (opt && opt->count() > 0) {
        return value;
    }
    if (const char *env = std::getenv("MICG_SEED")) {
        try {
            std::size_t used = 0;
            const auto s = std::stoull(env, &used);
            if (used == std::string_view(env).size()) {
                return s;
            }
        } catch (const std::exception &) {
        }
        throw ValidationError(std::string("MICG_SEED must be a non-negative integer, got '") + env + "'");
    }
    return 1;
}

void write_file(const fs::path &path, const std::string &content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

fs::path make_dir(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory '" + dir + "': " + ec.message());
    }
    return fs::path(dir);
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        cur = micg::detail::trim(cur);
        if (!cur.empty()) {
            out.push_back(cur);
        }
    }
    return out;
}

std::vector<double> numbers(const std::string &s, std::size_t expected, const std::string &what) {
    std::vector<double> out;
    for (const auto &p : split(s, ',')) {
        auto v = parse_number(p);
        if (!v) {
            throw ValidationError(what + ": '" + p + "' is not a number");
        }
        out.push_back(*v);
    }
    if (expected != 0 && out.size() != expected) {
        throw ValidationError(what + " needs " + std::to_string(expected) + " comma-separated numbers");
    }
    return out;
}

void apply_parameters(IndicatorCatalog &catalog, const std::vector<std::string> &params) {
    for (const auto &p : params) {
        const auto eq = p.find('=');
        auto v = eq == std::string::npos ? std::nullopt : parse_number(p.substr(eq + 1));
        if (!v) {
            throw ValidationError("--param expects name=value, got '" + p + "'");
        }
        catalog.set_parameter(p.substr(0, eq), *v);
    }
}

CsvTable read_joined(const std::vector<std::string> &paths) {
    std::vector<CsvTable> tables;
    for (const auto &p : paths) {
        tables.push_back(parse_csv(read_text_file(p)));
    }
    return join_tables(tables);
}

struct MatrixInput {
    std::string catalog;
    std::string matrix;
    std::string data;
    std::string policy = "exclude_child";
    std::vector<std::string> params;

    void add(CLI::App *cmd) {
        cmd->add_option("--catalog", catalog, "Indicator catalog (JSON)")->required();
        cmd->add_option("--matrix", matrix, "Deprivation matrix CSV from `micg code`");
        cmd->add_option("--data", data, "Child data CSV (coded on the fly)");
        cmd->add_option("--policy", policy, "Missing-data policy when coding --data")
            ->check(CLI::IsMember({"exclude_child", "treat_nondeprived", "renormalize"}));
        cmd->add_option("--param", params, "Catalog parameter name=value (repeatable)");
    }

    std::pair<IndicatorCatalog, DeprivationMatrix> load() const {
        IndicatorCatalog cat = load_catalog(catalog);
        apply_parameters(cat, params);
        if (matrix.empty() == data.empty()) {
            throw ValidationError("give exactly one of --matrix or --data");
        }
        if (!matrix.empty()) {
            return {std::move(cat), read_matrix_csv(read_text_file(matrix))};
        }
        auto ds = ingest_records(read_text_file(data), cat);
        for (const auto &w : ds.warnings) {
            std::cerr << "warning: " << w << '\n';
        }
        auto m = code_deprivations(ds, cat, parse_missing_policy(policy));
        return {std::move(cat), std::move(m)};
    }
};

WeightVector make_weights(const std::string &scheme, const IndicatorCatalog &cat, const DeprivationMatrix &m) {
    if (scheme == "equal") {
        return equal_nested_weights(cat);
    }
    if (scheme == "pca") {
        return pca_weights(m);
    }
    if (scheme.rfind("custom:", 0) == 0) {
        return custom_weights(parse_dimension_weights(read_text_file(scheme.substr(7))), cat);
    }
    throw ValidationError("unknown weighting scheme '" + scheme + "' (equal, pca, custom:<file>)");
}

std::string weights_csv(const WeightVector &w) {
    std::string out = "# provenance=" + std::string(to_string(w.provenance)) + "\n";
    if (!w.dropped_indicators.empty()) {
        out += "# dropped=";
        for (std::size_t i = 0; i < w.dropped_indicators.size(); ++i) {
            out += (i ? ";" : "") + w.dropped_indicators[i];
        }
        out += '\n';
    }
    out += "indicator,weight\n";
    for (std::size_t i = 0; i < w.ids.size(); ++i) {
        out += csv_escape(w.ids[i]) + ',' + format_number(w.weights[i]) + '\n';
    }
    return out;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"micg: Multidimensional Index of Child Growth toolkit"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", std::string("micg ") + micg::version);
    app.set_config("--config", "", "Read options from a TOML/INI file");
    app.require_subcommand(1);

    std::uint64_t seed_value = 1;
    auto add_seed = [&](CLI::App *cmd) {
        return cmd->add_option("--seed", seed_value, "Random seed (falls back to MICG_SEED, then 1)");
    };

    // code ----------------------------------------------------------------------------
    auto *code = app.add_subcommand("code", "Code raw child data into a deprivation matrix");
    std::string code_catalog, code_data, code_out, code_policy = "exclude_child";
    std::vector<std::string> code_params;
    code->add_option("--catalog", code_catalog, "Indicator catalog (JSON)")->required();
    code->add_option("--data", code_data, "Child data CSV")->required();
    code->add_option("--out", code_out, "Matrix CSV to write ('-' for stdout)")->required();
    code->add_option("--policy", code_policy, "Missing-data policy")
        ->check(CLI::IsMember({"exclude_child", "treat_nondeprived", "renormalize"}));
    code->add_option("--param", code_params, "Catalog parameter name=value (repeatable)");
    auto *code_seed = add_seed(code);

    // index ---------------------------------------------------------------------------
    auto *index = app.add_subcommand("index", "Scores, dimension profiles and frequency table");
    MatrixInput index_in;
    index_in.add(index);
    std::string index_weights = "equal", index_out = "micg-index", index_group, index_mode = "graded";
    double index_k = 1.0 / 3.0;
    index->add_option("--weights", index_weights, "equal | pca | custom:<dimension-weights.json>");
    index->add_option("--k", index_k, "Identification cutoff k in (0, 1]");
    index->add_option("--group", index_group, "Profile grouping keys, e.g. sex,area or country,sex,area");
    index->add_option("--dimension-mode", index_mode, "Dimension achievement: graded | binary")
        ->check(CLI::IsMember({"graded", "binary"}));
    index->add_option("--out-dir", index_out, "Output directory");
    auto *index_seed = add_seed(index);

    // robustness ----------------------------------------------------------------------
    auto *robust = app.add_subcommand("robustness", "Rank concordance and densities across weighting schemes");
    MatrixInput robust_in;
    robust_in.add(robust);
    std::string robust_schemes = "equal,pca", robust_out = "micg-robustness";
    double robust_bw = 0.0;
    robust->add_option("--schemes", robust_schemes, "Comma-separated schemes (equal, pca, custom:<file>)");
    robust->add_option("--bandwidth", robust_bw, "KDE bandwidth (default: Silverman's rule)");
    robust->add_option("--out-dir", robust_out, "Output directory");
    auto *robust_seed = add_seed(robust);

    // frontier ------------------------------------------------------------------------
    auto *frontier = app.add_subcommand("frontier", "Bayesian stochastic frontier: opportunities and left-behind risk");
    std::vector<std::string> fr_inputs;
    std::string fr_response = "A", fr_covariates = "sex,area", fr_out = "micg-frontier", fr_density;
    McmcConfig fr_cfg;
    FrontierPriors fr_priors;
    bool fr_predictive = false, fr_keep_u = false;
    frontier->add_option("--input", fr_inputs, "CSV files joined on child_id (repeatable)")->required();
    frontier->add_option("--response", fr_response, "Achievement column in [0, 1]");
    frontier->add_option("--covariates", fr_covariates, "Comma-separated covariate columns");
    frontier->add_option("--chains", fr_cfg.chains);
    frontier->add_option("--iterations", fr_cfg.iterations, "Per chain, burn-in included");
    frontier->add_option("--burn-in", fr_cfg.burn_in);
    frontier->add_option("--thin", fr_cfg.thinning);
    frontier->add_option("--rhat-threshold", fr_cfg.rhat_threshold);
    frontier->add_option("--clamp", fr_cfg.clamp_epsilon, "Achievements are clamped to [e, 1 - e]");
    frontier->add_option("--beta-sd", fr_priors.beta_sd);
    frontier->add_option("--sigma-shape", fr_priors.sigma_shape);
    frontier->add_option("--sigma-scale", fr_priors.sigma_scale);
    frontier->add_option("--lambda-shape", fr_priors.lambda_shape);
    frontier->add_option("--lambda-rate", fr_priors.lambda_rate);
    frontier->add_flag("--predictive", fr_predictive, "Opportunity = frontier minus shortfall draws");
    frontier->add_flag("--keep-shortfall", fr_keep_u, "Export per-child shortfall draws");
    frontier->add_option("--density-for", fr_density, "Comma-separated child ids: write opportunity densities");
    frontier->add_option("--out-dir", fr_out, "Output directory");
    auto *fr_seed = add_seed(frontier);

    // regress -------------------------------------------------------------------------
    auto *regress = app.add_subcommand("regress", "OLS and quantile regression");
    std::vector<std::string> rg_inputs;
    std::string rg_response, rg_covariates, rg_out = "-";
    std::vector<double> rg_taus;
    bool rg_ols = false;
    regress->add_option("--input", rg_inputs, "CSV files joined on child_id (repeatable)")->required();
    regress->add_option("--response", rg_response)->required();
    regress->add_option("--covariates", rg_covariates, "Comma-separated covariate columns")->required();
    regress->add_option("--tau", rg_taus, "Quantile level (repeatable)");
    regress->add_flag("--ols", rg_ols, "Also fit OLS");
    regress->add_option("--out", rg_out, "Fits CSV ('-' for stdout)");
    auto *rg_seed = add_seed(regress);

    // chart ---------------------------------------------------------------------------
    auto *chart = app.add_subcommand("chart", "SVG figures");
    chart->require_subcommand(1);
    std::string ch_out, ch_colors, ch_title;
    auto chart_common = [&](CLI::App *c) {
        c->add_option("--out", ch_out, "SVG file to write ('-' for stdout)")->required();
        c->add_option("--colors", ch_colors, "Comma-separated colours");
        c->add_option("--title", ch_title);
        return add_seed(c);
    };
    auto *ch_spider = chart->add_subcommand("spiderweb", "Dimension profile radar chart");
    std::string ch_profile;
    double ch_grid = 20.0;
    ch_spider->add_option("--profile", ch_profile, "Profile CSV from `micg index --group`")->required();
    ch_spider->add_option("--grid-step", ch_grid, "Gridline step in percent");
    auto *ch_spider_seed = chart_common(ch_spider);
    auto *ch_density = chart->add_subcommand("density", "Overlaid kernel densities");
    std::string ch_density_in;
    bool ch_no_median = false;
    ch_density->add_option("--density", ch_density_in, "Density CSV from `micg robustness`")->required();
    ch_density->add_flag("--no-median", ch_no_median);
    auto *ch_density_seed = chart_common(ch_density);
    auto *ch_lnb = chart->add_subcommand("lnb", "Achievements vs opportunity with the bottom-q% highlighted");
    std::string ch_profiles, ch_response = "A", ch_group = "sex,area";
    std::vector<std::string> ch_inputs;
    double ch_q = 10.0;
    ch_lnb->add_option("--profiles", ch_profiles, "profiles.csv from `micg frontier`")->required();
    ch_lnb->add_option("--input", ch_inputs, "CSVs with achievements and grouping columns")->required();
    ch_lnb->add_option("--response", ch_response, "Achievement column");
    ch_lnb->add_option("--group", ch_group, "Grouping columns");
    ch_lnb->add_option("--q", ch_q, "Highlight the bottom q percent by mean opportunity");
    auto *ch_lnb_seed = chart_common(ch_lnb);

    // simulate ------------------------------------------------------------------------
    auto *sim = app.add_subcommand("simulate", "Dynamics, geodesics and synthetic data");
    sim->require_subcommand(1);
    std::string sm_out = "-";
    double sm_h = 1e-3, sm_T = 10.0;
    auto sim_common = [&](CLI::App *c, bool stepped) {
        c->add_option("--out", sm_out, "CSV to write ('-' for stdout)");
        if (stepped) {
            c->add_option("--h", sm_h, "Step size");
            c->add_option("--T", sm_T, "Horizon");
        }
        return add_seed(c);
    };
    std::string sm_phi = "10,28,2.6666666666666665", sm_f0 = "1,1,1";
    auto *sm_coupled = sim->add_subcommand("coupled", "Rotationally coupled three-level system");
    sm_coupled->add_option("--phi", sm_phi, "Phi1,Phi2,Phi3 (default: the chaotic preset)");
    sm_coupled->add_option("--f0", sm_f0, "Initial fx,fy,fz");
    auto *sm_coupled_seed = sim_common(sm_coupled, true);

    auto *sm_chrono = sim->add_subcommand("chronosystem", "Coupled system with temporal deformation kappa(t)");
    std::string sm_kappa = "0", sm_base = "coupled";
    sm_chrono->add_option("--phi", sm_phi, "Phi1,Phi2,Phi3 for the coupled base");
    sm_chrono->add_option("--psi0", sm_f0, "Initial state");
    sm_chrono->add_option("--kappa", sm_kappa, "kappa(t) expression");
    sm_chrono->add_option("--base", sm_base, "coupled | zero")->check(CLI::IsMember({"coupled", "zero"}));
    auto *sm_chrono_seed = sim_common(sm_chrono, true);

    auto *sm_geo = sim->add_subcommand("geodesic", "Geodesic of a metric field");
    std::string sm_metric = "minkowski", sm_coords, sm_g, sm_x0, sm_v0;
    sm_geo->add_option("--metric", sm_metric, "minkowski | poincare-half-plane | custom")
        ->check(CLI::IsMember({"minkowski", "poincare-half-plane", "custom"}));
    sm_geo->add_option("--coords", sm_coords, "Coordinate names for custom metrics, e.g. x,y");
    sm_geo->add_option("--g", sm_g, "Custom metric rows: 'g11,g12;g21,g22'");
    sm_geo->add_option("--x0", sm_x0, "Start point");
    sm_geo->add_option("--v0", sm_v0, "Start velocity");
    auto *sm_geo_seed = sim_common(sm_geo, true);

    auto *sm_pot = sim->add_subcommand("potential", "Ecological potential E(x, y, z, t) along a time grid");
    std::vector<std::string> sm_psi, sm_lambda;
    std::string sm_point = "0,0,0";
    sm_pot->add_option("--psi", sm_psi, "Component field over x,y,z (repeatable)")->required();
    sm_pot->add_option("--lambda", sm_lambda, "Coupling over t (repeatable, one per --psi)")->required();
    sm_pot->add_option("--point", sm_point, "Evaluation point x,y,z");
    auto *sm_pot_seed = sim_common(sm_pot, true);

    auto *sm_synth = sim->add_subcommand("synth", "Synthetic child data for the catalog");
    std::string sy_catalog, sy_p = "0.3", sy_truth;
    std::vector<std::string> sy_params;
    synth::GeneratorSpec sy_spec;
    sm_synth->add_option("--catalog", sy_catalog)->required();
    sm_synth->add_option("--n", sy_spec.n);
    sm_synth->add_option("--p", sy_p, "Deprivation probability, one value or one per indicator");
    sm_synth->add_option("--rho", sy_spec.rho, "Latent single-factor correlation");
    sm_synth->add_option("--rural-shift", sy_spec.rural_shift);
    sm_synth->add_option("--female-shift", sy_spec.female_shift);
    sm_synth->add_option("--rural-share", sy_spec.rural_share);
    sm_synth->add_option("--female-share", sy_spec.female_share);
    sm_synth->add_option("--country", sy_spec.country);
    sm_synth->add_option("--param", sy_params, "Catalog parameter name=value (repeatable)");
    sm_synth->add_option("--truth", sy_truth, "Also write generating probabilities to this CSV");
    auto *sm_synth_seed = sim_common(sm_synth, false);

    auto *sm_fdata = sim->add_subcommand("frontier-data", "Synthetic achievements from a stochastic frontier");
    synth::FrontierSpec fd_spec;
    std::string fd_beta = "2,-0.5";
    sm_fdata->add_option("--n", fd_spec.n);
    sm_fdata->add_option("--beta", fd_beta, "Intercept,rural");
    sm_fdata->add_option("--sigma-v", fd_spec.sigma_v);
    sm_fdata->add_option("--lambda", fd_spec.lambda);
    sm_fdata->add_option("--rural-share", fd_spec.rural_share);
    auto *sm_fdata_seed = sim_common(sm_fdata, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*code) {
            RunInfo run{config_hash(code), resolve_seed(code_seed, seed_value)};
            IndicatorCatalog cat = load_catalog(code_catalog);
            apply_parameters(cat, code_params);
            auto ds = ingest_records(read_text_file(code_data), cat);
            for (const auto &w : ds.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
            auto m = code_deprivations(ds, cat, parse_missing_policy(code_policy));
            write_file(code_out, run.csv_header() + write_matrix_csv(m));
            std::cerr << "coded " << m.rows() << " of " << ds.size() << " children, " << ds.warning_count
                      << " warnings\n";
        } else if (*index) {
            RunInfo run{config_hash(index), resolve_seed(index_seed, seed_value)};
            auto [cat, m] = index_in.load();
            const auto w = make_weights(index_weights, cat, m);
            const auto result = deprivation_scores(m, w, index_k);
            const auto dims = dimension_achievements(
                m, cat, w, index_mode == "binary" ? DimensionMode::binary : DimensionMode::graded);
            const fs::path dir = make_dir(index_out);
            write_file(dir / "results.csv", run.csv_header() + write_results_csv(result, &dims));
            write_file(dir / "weights.csv", run.csv_header() + weights_csv(w));
            write_file(dir / "frequency.csv", run.csv_header() + write_frequency_csv(frequency_table(m.children)));
            const auto keys = index_group.empty() ? std::vector<std::string>{} : split(index_group, ',');
            const auto profile = group_profile(dims, group_labels(m.children, keys));
            write_file(dir / "profile.csv", run.csv_header() + write_profile_csv(profile));
            char summary[160];
            std::snprintf(summary, sizeof summary, "n=%zu H=%.4f intensity=%.4f M0=%.4f\n", result.children.size(),
                          result.headcount_ratio(), result.intensity(), result.adjusted_headcount());
            std::cout << summary;
        } else if (*robust) {
            RunInfo run{config_hash(robust), resolve_seed(robust_seed, seed_value)};
            auto [cat, m] = robust_in.load();
            std::vector<std::pair<std::string, std::vector<double>>> schemes;
            std::vector<std::pair<std::string, DensityCurve>> curves;
            for (const auto &s : split(robust_schemes, ',')) {
                const auto w = make_weights(s, cat, m);
                auto a = deprivation_scores(m, w).achievements();
                curves.emplace_back(s, robust_bw > 0.0 ? kde(a, robust_bw) : kde(a));
                schemes.emplace_back(s, std::move(a));
            }
            const fs::path dir = make_dir(robust_out);
            write_file(dir / "concordance.csv", run.csv_header() + write_concordance_csv(concordance(schemes)));
            write_file(dir / "density.csv", run.csv_header() + write_density_csv(curves));
        } else if (*frontier) {
            RunInfo run{config_hash(frontier), resolve_seed(fr_seed, seed_value)};
            fr_cfg.seed = run.seed;
            fr_cfg.keep_shortfall_draws = fr_keep_u || fr_predictive;
            const auto table = read_joined(fr_inputs);
            const auto design = build_design(table, fr_response, split(fr_covariates, ','));
            if (design.dropped_rows > 0) {
                std::cerr << "warning: dropped " << design.dropped_rows << " rows with missing values\n";
            }
            const std::vector<double> a(design.y.data(), design.y.data() + design.y.size());
            for (double v : a) {
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw ValidationError("response '" + fr_response + "' must lie in [0, 1]");
                }
            }
            const auto d = fit_frontier(a, design.x, fr_cfg, fr_priors, design.row_ids, design.terms);
            const auto mode = fr_predictive ? OpportunityMode::predictive : OpportunityMode::frontier;
            const fs::path dir = make_dir(fr_out);
            write_file(dir / "draws.csv", run.csv_header() + write_draws_csv(d, fr_keep_u));
            write_file(dir / "profiles.csv", run.csv_header() + write_profiles_csv(left_behind(d, a, mode)));
            std::string diag = "parameter,rhat\n";
            for (const auto &p : d.diagnostics) {
                diag += csv_escape(p.parameter) + ',' + format_number(p.rhat) + '\n';
            }
            write_file(dir / "diagnostics.csv", run.csv_header() + diag);
            if (!fr_density.empty()) {
                std::vector<std::pair<std::string, DensityCurve>> curves;
                for (const auto &id : split(fr_density, ',')) {
                    curves.emplace_back(id, opportunity_distribution(d, id, mode));
                }
                write_file(dir / "opportunity.csv", run.csv_header() + write_density_csv(curves));
            }
            if (!d.converged) {
                std::cerr << "warning: max split R-hat " << d.max_rhat << " exceeds " << fr_cfg.rhat_threshold
                          << "\n";
            }
        } else if (*regress) {
            RunInfo run{config_hash(regress), resolve_seed(rg_seed, seed_value)};
            if (rg_taus.empty() && !rg_ols) {
                throw ValidationError("nothing to fit: give --tau and/or --ols");
            }
            const auto design = build_design(read_joined(rg_inputs), rg_response, split(rg_covariates, ','));
            std::vector<RegressionFit> fits;
            if (rg_ols) {
                fits.push_back(ols_fit(design.y, design.x, design.terms));
            }
            for (double tau : rg_taus) {
                fits.push_back(quantile_fit(design.y, design.x, tau, design.terms));
            }
            write_file(rg_out, run.csv_header() + write_fits_csv(fits));
        } else if (*chart) {
            const auto colors = split(ch_colors, ',');
            if (*ch_spider) {
                RunInfo run{config_hash(ch_spider), resolve_seed(ch_spider_seed, seed_value)};
                const auto p = read_profile_csv(read_text_file(ch_profile));
                charts::SpiderwebSpec spec;
                spec.axes = p.dimensions;
                for (std::size_t g = 0; g < p.groups.size(); ++g) {
                    spec.series.emplace_back(p.groups[g], p.percent[g]);
                }
                spec.colors = colors;
                spec.grid_step = ch_grid;
                spec.title = ch_title;
                write_file(ch_out, run.svg(charts::spiderweb_svg(spec)));
            } else if (*ch_density) {
                RunInfo run{config_hash(ch_density), resolve_seed(ch_density_seed, seed_value)};
                charts::DensityChartOptions opt;
                opt.colors = colors;
                opt.title = ch_title;
                opt.show_median = !ch_no_median;
                write_file(ch_out, run.svg(charts::density_svg(read_density_csv(read_text_file(ch_density_in)), opt)));
            } else {
                RunInfo run{config_hash(ch_lnb), resolve_seed(ch_lnb_seed, seed_value)};
                const auto prof = parse_csv(read_text_file(ch_profiles));
                const auto table = read_joined(ch_inputs);
                const std::size_t id_col = table.require_column("child_id");
                const std::size_t a_col = table.require_column(ch_response);
                std::vector<std::size_t> group_cols;
                for (const auto &g : split(ch_group, ',')) {
                    group_cols.push_back(table.require_column(g));
                }
                std::map<std::string, std::size_t> row_of;
                for (std::size_t r = 0; r < table.rows.size(); ++r) {
                    row_of[table.rows[r][id_col]] = r;
                }
                const std::size_t p_id = prof.require_column("child_id"), p_mean = prof.require_column("mean");
                std::vector<double> ach, opp;
                std::vector<std::string> groups;
                for (const auto &row : prof.rows) {
                    auto it = row_of.find(row[p_id]);
                    if (it == row_of.end()) {
                        throw ValidationError("child '" + row[p_id] + "' has no row in the --input files");
                    }
                    const auto &src = table.rows[it->second];
                    auto a = parse_number(src[a_col]);
                    auto o = parse_number(row[p_mean]);
                    if (!a || !o) {
                        throw ValidationError("child '" + row[p_id] + "' has a non-numeric achievement or mean");
                    }
                    ach.push_back(*a);
                    opp.push_back(*o);
                    std::string label;
                    for (std::size_t k = 0; k < group_cols.size(); ++k) {
                        label += (k ? "|" : "") + src[group_cols[k]];
                    }
                    groups.push_back(label.empty() ? "all" : label);
                }
                charts::ScatterOptions opt;
                opt.colors = colors;
                opt.title = ch_title;
                write_file(ch_out, run.svg(charts::scatter_lnb_svg(ach, opp, groups, ch_q, opt)));
            }
        } else if (*sim) {
            using namespace micg::ecodyn;
            if (*sm_coupled || *sm_chrono) {
                const CLI::App *leaf = *sm_coupled ? sm_coupled : sm_chrono;
                RunInfo run{config_hash(leaf), resolve_seed(*sm_coupled ? sm_coupled_seed : sm_chrono_seed, seed_value)};
                const auto phi = numbers(sm_phi, 3, "--phi");
                const CurvatureParams params{phi[0], phi[1], phi[2]};
                const auto f0 = numbers(sm_f0, 3, "initial state");
                Trajectory tr;
                if (*sm_coupled) {
                    tr = integrate_coupled(params, {f0[0], f0[1], f0[2], 0.0}, sm_h, sm_T);
                } else {
                    auto k = std::make_shared<Expr>(Expr::parse(sm_kappa));
                    const std::vector<std::string> t_name{"t"};
                    k->bind(t_name);
                    auto kappa = [k](double t) {
                        const Value v[] = {t};
                        return k->evaluate_number(v);
                    };
                    const Dynamics base = sm_base == "zero" ? zero_dynamics() : coupled_dynamics(params);
                    tr = chronosystem_modulate(base, kappa, Vec{{f0[0], f0[1], f0[2]}}, sm_h, sm_T);
                }
                write_file(sm_out, run.csv_header() + write_trajectory_csv(tr, {"fx", "fy", "fz"}));
            } else if (*sm_geo) {
                RunInfo run{config_hash(sm_geo), resolve_seed(sm_geo_seed, seed_value)};
                MetricField metric;
                std::vector<std::string> coords;
                if (sm_metric == "minkowski") {
                    metric = minkowski();
                    coords = {"x", "y", "z"};
                } else if (sm_metric == "poincare-half-plane") {
                    metric = poincare_half_plane();
                    coords = {"x", "y"};
                } else {
                    coords = split(sm_coords, ',');
                    std::vector<std::vector<std::string>> rows;
                    for (const auto &r : split(sm_g, ';')) {
                        rows.push_back(split(r, ','));
                    }
                    metric = custom_metric(coords, rows);
                }
                const auto n = static_cast<std::size_t>(metric.dimension);
                std::vector<double> x0 = sm_x0.empty() ? std::vector<double>(n, 0.0) : numbers(sm_x0, n, "--x0");
                if (sm_x0.empty() && sm_metric == "poincare-half-plane") {
                    x0[1] = 1.0;
                }
                std::vector<double> v0 = sm_v0.empty() ? std::vector<double>(n, 0.0) : numbers(sm_v0, n, "--v0");
                if (sm_v0.empty()) {
                    v0.back() = 1.0;
                }
                const auto tr = geodesic(metric, Eigen::Map<const Vec>(x0.data(), static_cast<Eigen::Index>(n)),
                                         Eigen::Map<const Vec>(v0.data(), static_cast<Eigen::Index>(n)), sm_h, sm_T);
                std::vector<std::string> cols = coords;
                for (const auto &c : coords) {
                    cols.push_back("d" + c);
                }
                write_file(sm_out, run.csv_header() + write_trajectory_csv(tr, cols));
            } else if (*sm_pot) {
                RunInfo run{config_hash(sm_pot), resolve_seed(sm_pot_seed, seed_value)};
                const auto field = potential_from_expressions(sm_psi, sm_lambda);
                const auto p = numbers(sm_point, 3, "--point");
                const Vec point{{p[0], p[1], p[2]}};
                std::string csv = "t,E\n";
                const long steps = step_count(sm_h, sm_T);
                for (long k = 0; k <= steps; ++k) {
                    const double t = static_cast<double>(k) * sm_h;
                    csv += format_number(t) + ',' + format_number(potential(field, point, t)) + '\n';
                }
                write_file(sm_out, run.csv_header() + csv);
            } else if (*sm_synth) {
                RunInfo run{config_hash(sm_synth), resolve_seed(sm_synth_seed, seed_value)};
                IndicatorCatalog cat = load_catalog(sy_catalog);
                apply_parameters(cat, sy_params);
                sy_spec.probabilities = numbers(sy_p, 0, "--p");
                sy_spec.seed = run.seed;
                const auto data = synth::generate(cat, sy_spec);
                write_file(sm_out, run.csv_header() + write_dataset_csv(data.dataset));
                if (!sy_truth.empty()) {
                    std::string csv = "child_id";
                    for (const auto &id : data.truth.indicators) {
                        csv += ',' + csv_escape(id);
                    }
                    csv += '\n';
                    for (std::size_t i = 0; i < data.truth.probability.size(); ++i) {
                        csv += csv_escape(data.dataset.records[i].info.child_id);
                        for (double pr : data.truth.probability[i]) {
                            csv += ',' + format_number(pr);
                        }
                        csv += '\n';
                    }
                    write_file(sy_truth, run.csv_header() + csv);
                }
            } else {
                RunInfo run{config_hash(sm_fdata), resolve_seed(sm_fdata_seed, seed_value)};
                fd_spec.beta = numbers(fd_beta, 2, "--beta");
                fd_spec.seed = run.seed;
                const auto data = synth::generate_frontier(fd_spec);
                std::string csv = "child_id,sex,area,country,A\n";
                for (std::size_t i = 0; i < data.children.size(); ++i) {
                    const auto &c = data.children[i];
                    csv += c.child_id + ',' + std::string(to_string(*c.sex)) + ',' + std::string(to_string(*c.area)) +
                           ',' + c.country + ',' + format_number(data.achievements[i]) + '\n';
                }
                write_file(sm_out, run.csv_header() + csv);
            }
        }
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
