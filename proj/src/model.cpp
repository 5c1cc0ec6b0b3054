#include "lsv/model.hpp"

#include "lsv/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lsv {

double LocalVolFn::operator()(double index) const {
    const double i = std::clamp(index, index_lo, index_hi);
    const double v = scale * (a + i * (b + c * i));
    return std::clamp(v, floor, cap);
}

LocalVolFn LocalVolFn::flat(double vol) {
    LocalVolFn f;
    f.a = vol;
    f.b = 0.0;
    f.c = 0.0;
    f.scale = 1.0;
    f.floor = std::min(0.0, vol);
    f.cap = std::max(2.0, vol) + 1.0;
    return f;
}

LocalVolFn LocalVolFn::from_fit(const QuadraticFit& fit, double observed_lo, double observed_hi) {
    LocalVolFn f;
    f.a = fit.a;
    f.b = fit.b;
    f.c = fit.c;
    f.index_lo = observed_lo * 0.8;
    f.index_hi = observed_hi * 1.2;
    return f;
}

void LocalVolFn::validate() const {
    if (!(floor < cap)) throw InputError("localvol: floor must be below cap");
    if (!(floor >= 0.0)) throw InputError("localvol: floor must be nonnegative");
    if (!(index_lo <= index_hi)) throw InputError("localvol: empty index range");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(scale)) {
        throw InputError("localvol: coefficients must be finite");
    }
}

void ModelParams::validate() const {
    if (!(std::abs(rho) <= 1.0)) throw InputError("model: |rho| must be <= 1");
    if (!(s0 > 0.0)) throw InputError("model: s0 must be positive");
    if (!(a0 > 0.0)) throw InputError("model: a0 must be positive");
    if (!(kappa_kernel >= 0.0)) throw InputError("model: kappa_kernel must be >= 0");
    if (!(ou.kappa_y > 0.0)) throw InputError("model: kappa_y must be positive");
    if (!(ou.nu >= 0.0)) throw InputError("model: nu must be >= 0");
    if (!std::isfinite(r) || !std::isfinite(q)) throw InputError("model: rates must be finite");
    localvol.validate();
}

ModelParams ModelParams::scaled(double factor) const {
    ModelParams m = *this;
    m.s0 *= factor;
    m.a0 *= factor;
    return m;
}

double maturity(const Product& product) {
    return std::visit([](const auto& p) { return p.maturity; }, product);
}

std::string product_name(const Product& product) {
    struct Namer {
        std::string operator()(const VanillaCall&) const { return "vanilla_call"; }
        std::string operator()(const VanillaPut&) const { return "vanilla_put"; }
        std::string operator()(const UpAndOutCall&) const { return "up_and_out_call"; }
        std::string operator()(const VarianceSwap&) const { return "variance_swap"; }
        std::string operator()(const VolatilitySwap&) const { return "volatility_swap"; }
    };
    return std::visit(Namer{}, product);
}

void validate(const Product& product) {
    if (!(maturity(product) > 0.0)) throw InputError("product: maturity must be positive");
    if (const auto* c = std::get_if<VanillaCall>(&product); c && !(c->strike > 0.0)) {
        throw InputError("product: strike must be positive");
    }
    if (const auto* p = std::get_if<VanillaPut>(&product); p && !(p->strike > 0.0)) {
        throw InputError("product: strike must be positive");
    }
    if (const auto* u = std::get_if<UpAndOutCall>(&product)) {
        if (!(u->strike > 0.0)) throw InputError("product: strike must be positive");
        if (!(u->barrier > u->strike)) throw InputError("product: barrier must exceed strike");
    }
}

Product scaled(const Product& product, double factor) {
    Product out = product;
    if (auto* c = std::get_if<VanillaCall>(&out)) c->strike *= factor;
    if (auto* p = std::get_if<VanillaPut>(&out)) p->strike *= factor;
    if (auto* u = std::get_if<UpAndOutCall>(&out)) {
        u->strike *= factor;
        u->barrier *= factor;
    }
    return out;
}

nlohmann::json to_json(const LocalVolFn& f) {
    nlohmann::json j = {{"a", f.a},         {"b", f.b},         {"c", f.c},
                        {"scale", f.scale}, {"floor", f.floor}, {"cap", f.cap},
                        {"index_lo", f.index_lo}};
    if (std::isfinite(f.index_hi)) {
        j["index_hi"] = f.index_hi;
    } else {
        j["index_hi"] = nullptr;
    }
    return j;
}

nlohmann::json to_json(const ModelParams& m) {
    return {{"r", m.r},
            {"q", m.q},
            {"rho", m.rho},
            {"ou", to_json(m.ou)},
            {"kappa_kernel", m.kappa_kernel},
            {"localvol", to_json(m.localvol)},
            {"s0", m.s0},
            {"a0", m.a0}};
}

nlohmann::json to_json(const Product& p) {
    nlohmann::json j = {{"type", product_name(p)}, {"maturity", maturity(p)}};
    if (const auto* c = std::get_if<VanillaCall>(&p)) j["strike"] = c->strike;
    if (const auto* c = std::get_if<VanillaPut>(&p)) j["strike"] = c->strike;
    if (const auto* u = std::get_if<UpAndOutCall>(&p)) {
        j["strike"] = u->strike;
        j["barrier"] = u->barrier;
    }
    return j;
}

LocalVolFn localvol_from_json(const nlohmann::json& j) {
    try {
        LocalVolFn f;
        f.a = j.at("a").get<double>();
        f.b = j.at("b").get<double>();
        f.c = j.at("c").get<double>();
        f.scale = j.value("scale", f.scale);
        f.floor = j.value("floor", f.floor);
        f.cap = j.value("cap", f.cap);
        f.index_lo = j.value("index_lo", f.index_lo);
        if (j.contains("index_hi") && !j.at("index_hi").is_null()) {
            f.index_hi = j.at("index_hi").get<double>();
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("localvol json: ") + e.what());
    }
}

ModelParams model_from_json(const nlohmann::json& j) {
    try {
        ModelParams m;
        m.r = j.value("r", 0.0);
        m.q = j.value("q", 0.0);
        m.rho = j.value("rho", 0.0);
        m.ou = ou_from_json(j.at("ou"));
        m.kappa_kernel = j.at("kappa_kernel").get<double>();
        m.localvol = localvol_from_json(j.at("localvol"));
        m.s0 = j.value("s0", 100.0);
        m.a0 = j.value("a0", m.s0);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model json: ") + e.what());
    }
}

Product product_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("product: expected a JSON object");
    auto number = [&](const char* field) -> double {
        if (!j.contains(field)) throw InputError(std::string("product: missing field '") + field + "'");
        const auto& v = j.at(field);
        if (!v.is_number()) throw InputError(std::string("product: field '") + field + "' must be a number");
        return v.get<double>();
    };
    if (!j.contains("type") || !j.at("type").is_string()) {
        throw InputError("product: missing field 'type'");
    }
    const auto type = j.at("type").get<std::string>();
    Product p;
    if (type == "vanilla_call" || type == "call") {
        p = VanillaCall{number("strike"), number("maturity")};
    } else if (type == "vanilla_put" || type == "put") {
        p = VanillaPut{number("strike"), number("maturity")};
    } else if (type == "up_and_out_call") {
        p = UpAndOutCall{number("strike"), number("barrier"), number("maturity")};
    } else if (type == "variance_swap") {
        p = VarianceSwap{number("maturity")};
    } else if (type == "volatility_swap") {
        p = VolatilitySwap{number("maturity")};
    } else {
        throw InputError("product: field 'type' has unknown value '" + type + "'");
    }
    validate(p);
    return p;
}

}  // namespace lsv
