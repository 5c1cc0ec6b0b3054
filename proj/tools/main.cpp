#include "commands.hpp"

#include "lsv/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

int report_error(const std::filesystem::path& out, const std::string& type, const std::string& message,
                 int code) {
    const nlohmann::json err = {{"error", {{"type", type}, {"message", message}}},
                                {"exit_code", code},
                                {"version", LSV_VERSION}};
    std::cerr << err.dump() << '\n';
    std::error_code ec;
    if (std::filesystem::is_directory(out, ec)) {
        std::ofstream f(out / "error.json");
        if (f) f << err.dump(2) << '\n';
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-dependent local stochastic volatility toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
    app.add_option("--config", config_path, "Run configuration (key = value)");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides config)");
    auto* out_opt = app.add_option("--out", out, "Output directory");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = all cores)");

    lsv::cli::Context ctx;
    auto* calibrate = app.add_subcommand("calibrate", "Fit the kernel, quadratic and innovation model");
    auto* price = app.add_subcommand("price", "Price a product from a calibration artifact");
    price->add_option("--product", ctx.product_path, "Product JSON file");
    price->add_option("--engines", ctx.engines, "Comma-separated engines: mc,pde,mlp");
    auto* scenario = app.add_subcommand("scenario", "Generate joint SPX/VIX scenarios");
    auto* report = app.add_subcommand("report", "Emit plot data for the calibration");
    auto* quantize = app.add_subcommand("quantize", "Dump the functional quantizer");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    seed_given = seed_opt->count() > 0;
    ctx.out = out;
    ctx.threads = threads;

    try {
        if (!config_path.empty()) ctx.config = lsv::cli::RunConfig::load(config_path);
        if (seed_given) ctx.config.set("seed", std::to_string(seed));
        // Command-line flags win over the config file.
        if (!out_opt->count()) {
            if (const auto p = ctx.config.path("out")) ctx.out = *p;
        }
        if (!threads_opt->count()) ctx.threads = static_cast<unsigned>(ctx.config.count("threads", threads));
        if (calibrate->parsed()) lsv::cli::cmd_calibrate(ctx);
        if (price->parsed()) lsv::cli::cmd_price(ctx);
        if (scenario->parsed()) lsv::cli::cmd_scenario(ctx);
        if (report->parsed()) lsv::cli::cmd_report(ctx);
        if (quantize->parsed()) lsv::cli::cmd_quantize(ctx);
    } catch (const lsv::InputError& e) {
        return report_error(ctx.out, "input_error", e.what(), 2);
    } catch (const lsv::NumericalError& e) {
        return report_error(ctx.out, "numerical_error", e.what(), 1);
    } catch (const std::exception& e) {
        return report_error(ctx.out, "numerical_error", e.what(), 1);
    }
    return 0;
}
