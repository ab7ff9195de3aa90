// SPDX-License-Identifier: Apache-2.0
#pragma once

// Mask config JSON: {"W": <number>, "constraints": [{"U_dB": ..., "alpha": ...,
// "eta": ...}, ...]}. Validation errors name the offending field.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "covert/errors.hpp"
#include "covert/spectral_mask.hpp"

namespace covert {

inline SpectralMask mask_from_json(const nlohmann::json& j) {
    auto require_number = [](const nlohmann::json& node, const std::string& field) {
        if (!node.contains(field)) throw ConfigError("mask config: missing field '" + field + "'");
        if (!node[field].is_number()) throw ConfigError("mask config: field '" + field + "' must be a number");
        return node[field].get<double>();
    };
    SpectralMask mask;
    mask.w = require_number(j, "W");
    if (!j.contains("constraints") || !j["constraints"].is_array() || j["constraints"].empty()) {
        throw ConfigError("mask config: field 'constraints' must be a non-empty array");
    }
    std::size_t idx = 0;
    for (const auto& c : j["constraints"]) {
        try {
            MaskConstraint mc;
            mc.u_db = require_number(c, "U_dB");
            mc.alpha = require_number(c, "alpha");
            mc.eta = require_number(c, "eta");
            mask.constraints.push_back(mc);
        } catch (const ConfigError& e) {
            throw ConfigError("constraints[" + std::to_string(idx) + "]: " + e.what());
        }
        ++idx;
    }
    mask.validate();
    return mask;
}

inline SpectralMask mask_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("mask config: invalid JSON: ") + e.what());
    }
    return mask_from_json(j);
}

inline SpectralMask mask_from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open mask config '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return mask_from_json_text(ss.str());
}

inline nlohmann::json mask_to_json(const SpectralMask& mask) {
    nlohmann::json j;
    j["W"] = mask.w;
    j["constraints"] = nlohmann::json::array();
    for (const auto& c : mask.constraints) {
        j["constraints"].push_back({{"U_dB", c.u_db}, {"alpha", c.alpha}, {"eta", c.eta}});
    }
    return j;
}

}  // namespace covert
