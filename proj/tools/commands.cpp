#include "commands.hpp"

#include "lsv/black.hpp"
#include "lsv/calibration.hpp"
#include "lsv/errors.hpp"
#include "lsv/kernel.hpp"
#include "lsv/market_data.hpp"
#include "lsv/mlp.hpp"
#include "lsv/pde.hpp"
#include "lsv/pricer.hpp"
#include "lsv/quantizer.hpp"
#include "lsv/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace lsv::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw InputError("output directory not writable: '" + dir.string() + "'");
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("output directory not writable: cannot create '" + path.string() + "'");
    out << content;
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void write_csv(const Context& ctx, const std::string& name,
               const std::function<void(std::ostream&)>& body) {
    std::ostringstream s;
    s << "# lsv " << LSV_VERSION << " config=" << ctx.config.hash() << '\n';
    body(s);
    write_file(ctx.out / name, s.str());
}

void write_json(const Context& ctx, const std::string& name, nlohmann::json body) {
    body["version"] = LSV_VERSION;
    body["config_hash"] = ctx.config.hash();
    write_file(ctx.out / name, body.dump(2) + "\n");
}

std::string fmt(double v) { return format_double(v); }

JointSeries load_data(const RunConfig& cfg, std::size_t* rejected = nullptr) {
    MarketSeries spx;
    MarketSeries vix;
    std::size_t bad = 0;
    if (const auto joint = cfg.path("data_csv")) {
        auto s = load_series(*joint, cfg.text("spx_column", "spx"));
        auto v = load_series(*joint, cfg.text("vix_column", "vix"));
        bad = s.rejected.size() + v.rejected.size();
        spx = std::move(s.series);
        vix = std::move(v.series);
    } else {
        const auto sp = cfg.path("spx_csv");
        const auto vp = cfg.path("vix_csv");
        if (!sp || !vp) throw InputError("config: set data_csv, or both spx_csv and vix_csv");
        auto s = load_series(*sp, cfg.text("spx_column", "close"));
        auto v = load_series(*vp, cfg.text("vix_column", "close"));
        bad = s.rejected.size() + v.rejected.size();
        spx = std::move(s.series);
        vix = std::move(v.series);
    }
    if (rejected) *rejected = bad;
    return align(spx, vix).joint;
}

JointSeries window(const JointSeries& data, const RunConfig& cfg, const std::string& start_key,
                   const std::string& end_key) {
    const auto start = cfg.date(start_key);
    const auto end = cfg.date(end_key);
    if (!start && !end) return data;
    const Date lo = start.value_or(data.dates().front());
    const Date hi = end.value_or(Date{data.dates().back().days + 1});
    return slice(data, lo, hi);
}

struct Calibrated {
    Kernel kernel = Kernel({1.0});
    QuadraticFit fit;
    ARFit ar;
    OUParams ou;
    double kappa_kernel = 0.0;
    double index_lo = 0.0;
    double index_hi = 0.0;
};

fs::path calibration_path(const Context& ctx) {
    return ctx.config.path("calibration").value_or(ctx.out / "calibration.json");
}

Calibrated load_calibration(const Context& ctx) {
    const auto path = calibration_path(ctx);
    std::ifstream in(path);
    if (!in) throw InputError("calibration artifact not found: '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
        Calibrated c;
        const auto cal = calibration_from_json(j.at("calibration"));
        c.kernel = cal.kernel;
        c.fit = cal.fit;
        c.ar = ar_from_json(j.at("ar1"));
        c.ou = ou_from_json(j.at("ou"));
        c.kappa_kernel = j.at("kappa_kernel").get<double>();
        c.index_lo = j.at("index_range").at(0).get<double>();
        c.index_hi = j.at("index_range").at(1).get<double>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("calibration artifact '" + path.string() + "': " + e.what());
    }
}

ModelParams build_model(const RunConfig& cfg, const Calibrated& cal) {
    ModelParams m;
    m.r = cfg.number("r", 0.0);
    m.q = cfg.number("q", 0.0);
    m.rho = cfg.number("rho", 0.0);
    m.ou = cal.ou;
    m.ou.kappa_y = cfg.number("kappa_y", m.ou.kappa_y);
    m.ou.nu = cfg.number("nu", m.ou.nu);
    m.ou.y0 = cfg.number("y0", m.ou.y0);
    m.kappa_kernel = cal.kappa_kernel;
    m.localvol = LocalVolFn::from_fit(cal.fit, cal.index_lo, cal.index_hi);
    m.s0 = cfg.number("s0", 100.0);
    m.a0 = cfg.number("a0", m.s0);
    m.validate();
    return m;
}

QuantizerBasis basis_of(const RunConfig& cfg) {
    const auto b = cfg.text("quantizer_basis", "terminal_anchored");
    if (b == "terminal_anchored") return QuantizerBasis::terminal_anchored;
    if (b == "brownian_kl") return QuantizerBasis::brownian_kl;
    throw InputError("config: quantizer_basis must be terminal_anchored or brownian_kl");
}

QuantizerSet build_q(const RunConfig& cfg, const OUParams& ou, double horizon) {
    auto alloc = cfg.counts("quantizer_allocation");
    if (alloc.empty()) alloc = {3};
    return build_quantizer(ou, horizon, cfg.count("quantizer_grid_steps", 0), alloc, basis_of(cfg));
}

std::vector<double> index_values(const JointSeries& data, const Kernel& kernel) {
    return scale_index(data.spx(), kernel);
}

}  // namespace

void cmd_calibrate(const Context& ctx) {
    const auto& cfg = ctx.config;
    std::size_t rejected = 0;
    const auto all = load_data(cfg, &rejected);
    const auto in_sample = window(all, cfg, "in_sample_start", "in_sample_end");
    const std::size_t n = cfg.count("kernel_n", 250);
    const auto init_name = cfg.text("kernel_init", "flat");
    Kernel init = flat_kernel(n);
    if (init_name == "exponential") {
        init = exp_kernel(4.0 / static_cast<double>(n), n);
    } else if (init_name != "flat") {
        throw InputError("config: kernel_init must be flat or exponential");
    }
    ensure_dir(ctx.out);

    OptimizeOptions opts;
    opts.random_restarts = cfg.count("random_restarts", 1);
    opts.threads = ctx.threads;
    const auto result =
        optimize_kernel(in_sample, n, init, cfg.count("optimizer_budget", 500), cfg.seed(), opts);

    const auto idx = index_values(in_sample, result.kernel);
    const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
    const auto innov = innovations(in_sample, result.kernel, result.fit, cfg.number("innovation_floor", 1.0));
    const auto ar = fit_ar1(innov.values);
    const auto ou = map_ar1_to_ou(ar);
    const double kappa = equivalent_ewma_rate(result.kernel);

    struct Row {
        std::string sample;
        Date start;
        Date end;
        std::size_t rows;
        double r2;
    };
    std::vector<Row> rows;
    const std::size_t used = in_sample.size() - n;
    rows.push_back({"in_sample", in_sample.dates()[n], in_sample.dates().back(), used, result.in_sample_r2});
    nlohmann::json oos = nullptr;
    if (cfg.has("out_sample_start") || cfg.has("out_sample_end")) {
        const auto out_sample = window(all, cfg, "out_sample_start", "out_sample_end");
        const double r2 = evaluate_fit(result, out_sample);
        rows.push_back({"out_of_sample", out_sample.dates()[n], out_sample.dates().back(),
                        out_sample.size() - n, r2});
        oos = r2;
    }

    nlohmann::json j;
    j["calibration"] = to_json(result);
    j["kernel_n"] = n;
    j["seed"] = cfg.seed();
    j["in_sample"] = {{"start", in_sample.dates().front().iso()},
                      {"end", in_sample.dates().back().iso()},
                      {"rows", in_sample.size()}};
    j["rejected_rows"] = rejected;
    j["out_of_sample_r2"] = oos;
    j["index_range"] = {*lo, *hi};
    j["ar1"] = to_json(ar);
    j["ou"] = to_json(ou);
    j["kappa_kernel"] = kappa;
    j["innovations"] = {{"count", innov.values.size()}, {"floored", innov.floored}};
    write_json(ctx, "calibration.json", j);
    write_csv(ctx, "kernel_weights.csv", [&](std::ostream& o) { write_kernel_csv(result.kernel, o); });
    write_csv(ctx, "fit_diagnostics.csv", [&](std::ostream& o) {
        o << "sample,start,end,rows,r2,a,b,c\n";
        for (const auto& r : rows) {
            o << r.sample << ',' << r.start.iso() << ',' << r.end.iso() << ',' << r.rows << ','
              << fmt(r.r2) << ',' << fmt(result.fit.a) << ',' << fmt(result.fit.b) << ','
              << fmt(result.fit.c) << '\n';
        }
    });
}

namespace {

Product load_product(const Context& ctx) {
    fs::path path;
    if (!ctx.product_path.empty()) {
        path = ctx.product_path;
    } else if (const auto p = ctx.config.path("product")) {
        path = *p;
    } else {
        throw InputError("price: no product given (--product or config key 'product')");
    }
    std::ifstream in(path);
    if (!in) throw InputError("product file not found: '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("product '" + path.string() + "': malformed JSON at byte " + std::to_string(e.byte));
    }
    return product_from_json(j);
}

std::vector<std::string> engine_list(const Context& ctx) {
    std::string spec = ctx.engines.empty() ? ctx.config.text("engines", "mc") : ctx.engines;
    std::vector<std::string> out;
    std::stringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        if (item != "mc" && item != "pde" && item != "mlp") {
            throw InputError("price: unknown engine '" + item + "' (expected mc, pde or mlp)");
        }
        if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
    }
    if (out.empty()) throw InputError("price: empty engine list");
    return out;
}

Product with_strike(const Product& p, double k) {
    if (const auto* c = std::get_if<VanillaCall>(&p)) return VanillaCall{k, c->maturity};
    if (const auto* q = std::get_if<VanillaPut>(&p)) return VanillaPut{k, q->maturity};
    return p;
}

}  // namespace

void cmd_price(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto product = load_product(ctx);
    const auto engines = engine_list(ctx);
    const auto cal = load_calibration(ctx);
    const auto model = build_model(cfg, cal);
    const double T = maturity(product);
    const auto q = build_q(cfg, model.ou, cfg.number("quantize_horizon", T));
    const std::size_t n_paths = cfg.count("n_paths", 10000);
    PdeGrid grid;
    grid.spot_nodes = cfg.count("pde_spot_nodes", grid.spot_nodes);
    grid.average_nodes = cfg.count("pde_average_nodes", grid.average_nodes);
    grid.time_steps = cfg.count("pde_time_steps", grid.time_steps);
    const auto adv = cfg.text("pde_advection", "semi_lagrangian");
    if (adv == "upwind") {
        grid.advection = AdvectionScheme::upwind;
    } else if (adv != "semi_lagrangian") {
        throw InputError("config: pde_advection must be semi_lagrangian or upwind");
    }
    const bool vanilla = std::holds_alternative<VanillaCall>(product) ||
                         std::holds_alternative<VanillaPut>(product);
    const OptionType type = std::holds_alternative<VanillaPut>(product) ? OptionType::put : OptionType::call;
    for (const auto& e : engines) {
        if (e != "mc" && !vanilla) {
            throw InputError("price: engine '" + e + "' supports vanilla calls and puts only");
        }
    }
    ensure_dir(ctx.out);

    std::vector<double> strikes = cfg.numbers("strikes");
    if (!vanilla) strikes.clear();
    std::vector<Product> ladder{product};
    for (double k : strikes) ladder.push_back(with_strike(product, k));

    auto implied = [&](const Product& p, double price) -> nlohmann::json {
        double k = 0.0;
        if (const auto* c = std::get_if<VanillaCall>(&p)) k = c->strike;
        if (const auto* u = std::get_if<VanillaPut>(&p)) k = u->strike;
        try {
            return implied_vol(price, model.s0, k, T, model.r, model.q, type);
        } catch (const InputError&) {
            return nullptr;
        }
    };

    struct Row {
        double strike;
        std::string engine;
        PriceResult result;
        nlohmann::json iv;
    };
    std::vector<Row> rows;
    McOptions mc;
    mc.threads = ctx.threads;
    for (const auto& e : engines) {
        std::vector<PriceResult> results;
        if (e == "mc") {
            results = price_mc(ladder, model, q, n_paths, cfg.seed(), mc);
        } else {
            for (const auto& p : ladder) {
                results.push_back(e == "pde" ? price_pde(p, model, q, grid, ctx.threads) : price_mlp(p, model, q));
            }
        }
        nlohmann::json j;
        j["product"] = to_json(product);
        j["engine"] = e;
        j["model"] = to_json(model);
        j["quantizer"] = {{"size", q.size()}, {"allocation", q.allocation}, {"horizon", q.horizon}};
        j["seed"] = cfg.seed();
        j["result"] = to_json(results.front());
        j["value"] = results.front().value;
        j["std_error"] = results.front().std_error;
        j["per_quantizer"] = results.front().per_quantizer;
        if (vanilla) j["implied_vol"] = implied(product, results.front().value);
        write_json(ctx, "price_" + e + ".json", j);
        for (std::size_t i = 1; i < ladder.size(); ++i) {
            rows.push_back({strikes[i - 1], e, results[i], implied(ladder[i], results[i].value)});
        }
    }
    if (!rows.empty()) {
        write_csv(ctx, "implied_vols.csv", [&](std::ostream& o) {
            o << "strike,engine,price,std_error,implied_vol\n";
            for (const auto& r : rows) {
                o << fmt(r.strike) << ',' << r.engine << ',' << fmt(r.result.value) << ','
                  << fmt(r.result.std_error) << ',' << (r.iv.is_null() ? "" : fmt(r.iv.get<double>())) << '\n';
            }
        });
    }
}

void cmd_scenario(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto cal = load_calibration(ctx);
    const auto model = build_model(cfg, cal);
    ScenarioOptions opts;
    opts.threads = ctx.threads;
    if (const auto d = cfg.date("scenario_start")) opts.start = *d;
    const auto measure = cfg.text("scenario_measure", "risk_neutral");
    if (measure == "real_world") {
        opts.use_real_world_drift = true;
        opts.real_world_drift = cfg.number("real_world_drift", 0.0);
    } else if (measure != "risk_neutral") {
        throw InputError("config: scenario_measure must be risk_neutral or real_world");
    }
    opts.y0 = cfg.number("y0", 0.0);
    const double horizon = cfg.number("scenario_horizon", 1.0);
    const std::size_t n = cfg.count("scenario_paths", 100);
    const bool have_data = cfg.has("data_csv") || (cfg.has("spx_csv") && cfg.has("vix_csv"));
    JointSeries reference;
    if (have_data) reference = window(load_data(cfg), cfg, "in_sample_start", "in_sample_end");
    ensure_dir(ctx.out);

    const auto set = generate(model, cal.fit, cal.ar, horizon, n, cfg.seed(), opts);
    write_csv(ctx, "scenario_spx.csv", [&](std::ostream& o) { write_scenario_csv(set.spx_paths, o); });
    write_csv(ctx, "scenario_vix.csv", [&](std::ostream& o) { write_scenario_csv(set.vix_paths, o); });
    nlohmann::json manifest;
    manifest["seed"] = set.seed;
    manifest["paths"] = set.paths();
    manifest["steps"] = set.steps();
    manifest["horizon"] = horizon;
    manifest["start"] = set.grid.front().iso();
    manifest["end"] = set.grid.back().iso();
    manifest["measure"] = measure;
    manifest["model"] = to_json(model);
    manifest["quadratic"] = to_json(cal.fit);
    manifest["ar1"] = to_json(cal.ar);
    manifest["files"] = {"scenario_spx.csv", "scenario_vix.csv"};
    manifest["implementation_defined"] =
        "daily Euler spot with zero spot/vol correlation, AR(1) innovation, VIX = max(floor, f(I)) e^y";
    if (have_data) {
        ValidationThresholds th;
        th.ks_index = cfg.number("ks_threshold", th.ks_index);
        const auto report = validate(set, reference, model.kappa_kernel, th);
        write_json(ctx, "validation.json", report.summary);
        write_csv(ctx, "validation.csv", [&](std::ostream& o) { write_validation_csv(report, o); });
        manifest["files"].push_back("validation.json");
        manifest["files"].push_back("validation.csv");
    }
    write_json(ctx, "scenario_manifest.json", manifest);
}

void cmd_report(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto cal = load_calibration(ctx);
    const auto data = window(load_data(cfg), cfg, "in_sample_start", "in_sample_end");
    const std::size_t n = cal.kernel.size();
    if (data.size() <= n + 1) throw InputError("report: in-sample data shorter than the kernel");
    ensure_dir(ctx.out);

    const auto idx = index_values(data, cal.kernel);
    write_csv(ctx, "report_scatter.csv", [&](std::ostream& o) {
        o << "date,index,vix,fitted\n";
        for (std::size_t t = 0; t < idx.size(); ++t) {
            o << data.dates()[n + t].iso() << ',' << fmt(idx[t]) << ',' << fmt(data.vix()[n + t]) << ','
              << fmt(cal.fit(idx[t])) << '\n';
        }
    });
    write_csv(ctx, "report_curve.csv", [&](std::ostream& o) {
        o << "index,fitted\n";
        const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
        for (int i = 0; i <= 100; ++i) {
            const double x = *lo + (*hi - *lo) * i / 100.0;
            o << fmt(x) << ',' << fmt(cal.fit(x)) << '\n';
        }
    });
    write_csv(ctx, "report_weights.csv", [&](std::ostream& o) {
        o << "lag,weight,powerlaw\n";
        std::vector<double> pl(n, 0.0);
        if (n >= 4) {
            const auto p = fit_power_law(cal.kernel);
            const auto k = powerlaw_kernel(p.p, n);
            std::copy(k.weights().begin(), k.weights().end(), pl.begin());
        }
        for (std::size_t j = 1; j <= n; ++j) {
            o << j << ',' << fmt(cal.kernel.at_lag(j)) << ',' << fmt(pl[j - 1]) << '\n';
        }
    });
    const auto innov = innovations(data, cal.kernel, cal.fit, cfg.number("innovation_floor", 1.0));
    write_csv(ctx, "report_innovations.csv", [&](std::ostream& o) {
        o << "date,innovation\n";
        for (std::size_t t = 0; t < innov.values.size(); ++t) {
            o << innov.dates[t].iso() << ',' << fmt(innov.values[t]) << '\n';
        }
    });

    struct Baseline {
        std::string name;
        Kernel kernel;
    };
    std::vector<Baseline> baselines;
    for (std::size_t len : {5, 10, 20, 50, 100, 250}) {
        if (len + 10 < data.size()) baselines.push_back({"flat", flat_kernel(len)});
    }
    if (n + 10 < data.size() && n > 1) {
        baselines.push_back({"exponential", exp_kernel(4.0 / static_cast<double>(n), n)});
    }
    std::ostringstream scatter;
    scatter << "kernel,n,date,index,vix\n";
    write_csv(ctx, "report_baselines.csv", [&](std::ostream& o) {
        o << "kernel,n,r2,a,b,c\n";
        for (const auto& b : baselines) {
            const auto bidx = index_values(data, b.kernel);
            const std::span<const double> target(data.vix().data() + b.kernel.size(), bidx.size());
            const auto fit = fit_quadratic(bidx, target);
            o << b.name << ',' << b.kernel.size() << ',' << fmt(fit.r2) << ',' << fmt(fit.a) << ','
              << fmt(fit.b) << ',' << fmt(fit.c) << '\n';
            for (std::size_t t = 0; t < bidx.size(); ++t) {
                scatter << b.name << ',' << b.kernel.size() << ','
                        << data.dates()[b.kernel.size() + t].iso() << ',' << fmt(bidx[t]) << ','
                        << fmt(target[t]) << '\n';
            }
        }
    });
    write_csv(ctx, "report_baseline_scatter.csv", [&](std::ostream& o) { o << scatter.str(); });
}

void cmd_quantize(const Context& ctx) {
    const auto& cfg = ctx.config;
    OUParams ou;
    const bool from_cal = cfg.has("calibration") || fs::exists(ctx.out / "calibration.json");
    if (from_cal && !(cfg.has("kappa_y") && cfg.has("nu"))) ou = load_calibration(ctx).ou;
    ou.kappa_y = cfg.number("kappa_y", ou.kappa_y);
    ou.nu = cfg.number("nu", ou.nu);
    ou.y0 = cfg.number("y0", ou.y0);
    const auto q = build_q(cfg, ou, cfg.number("quantize_horizon", 1.0));
    ensure_dir(ctx.out);
    write_csv(ctx, "quantizer.csv", [&](std::ostream& o) { write_quantizer_csv(q, o); });
    write_json(ctx, "quantizer.json", quantizer_header_json(q));
}

}  // namespace lsv::cli
