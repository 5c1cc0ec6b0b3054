#pragma once

#include "config.hpp"

#include <filesystem>
#include <string>

namespace lsv::cli {

struct Context {
    RunConfig config;
    std::filesystem::path out = ".";
    unsigned threads = 1;
    std::string product_path;  ///< price: overrides the `product` key
    std::string engines;       ///< price: overrides the `engines` key
};

void cmd_calibrate(const Context& ctx);
void cmd_price(const Context& ctx);
void cmd_scenario(const Context& ctx);
void cmd_report(const Context& ctx);
void cmd_quantize(const Context& ctx);

}  // namespace lsv::cli
