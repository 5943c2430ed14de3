#pragma once

// JSON forms of the run-configuration objects: distribution specs (kind tag
// plus numeric fields), mechanism parameters, and grid axes. The CLI's config
// files and metadata sidecars both speak this format.

#include <json.hpp>

#include <string>

#include "escm/analytics.hpp"
#include "escm/competence.hpp"
#include "escm/errors.hpp"
#include "escm/montecarlo.hpp"
#include "escm/scan.hpp"
#include "escm/weighting.hpp"

namespace escm {

using nlohmann::json;

inline json dist_to_json(const CompetenceDistribution& dist);

namespace detail {

inline json component_to_json(const MixtureComponent& component) {
    if (const auto* beta = std::get_if<BetaSpec>(&component)) {
        return {{"kind", "beta"}, {"alpha", beta->alpha()}, {"beta", beta->beta()}};
    }
    const auto& tn = std::get<TruncatedNormalSpec>(component);
    return {{"kind", "truncated_normal"},
            {"location", tn.location()},
            {"scale", tn.scale()},
            {"lower", tn.lower()},
            {"upper", tn.upper()}};
}

inline double require_number(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw UsageError(context + ": missing numeric field '" + key + "'");
    }
    return j.at(key).get<double>();
}

}  // namespace detail

inline json dist_to_json(const CompetenceDistribution& dist) {
    if (const auto* beta = std::get_if<BetaSpec>(&dist)) {
        return {{"kind", "beta"}, {"alpha", beta->alpha()}, {"beta", beta->beta()}};
    }
    if (const auto* tn = std::get_if<TruncatedNormalSpec>(&dist)) {
        return detail::component_to_json(*tn);
    }
    if (const auto* pm = std::get_if<PointMassSpec>(&dist)) {
        return {{"kind", "point"}, {"p", pm->p()}};
    }
    const auto& mix = std::get<MixtureSpec>(dist);
    json components = json::array();
    for (const auto& entry : mix.components()) {
        components.push_back(
            {{"weight", entry.weight}, {"component", detail::component_to_json(entry.component)}});
    }
    return {{"kind", "mixture"}, {"components", components}};
}

inline CompetenceDistribution dist_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw UsageError("dist: expected an object with a 'kind' tag");
    }
    std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "beta") {
            return BetaSpec(detail::require_number(j, "alpha", "dist.beta"),
                            detail::require_number(j, "beta", "dist.beta"));
        }
        if (kind == "beta_mu_sigma") {
            return beta_from_mu_sigma({detail::require_number(j, "mu", "dist.beta_mu_sigma"),
                                       detail::require_number(j, "sigma", "dist.beta_mu_sigma")});
        }
        if (kind == "truncated_normal") {
            double lower = j.contains("lower") ? j.at("lower").get<double>() : 0.0;
            double upper = j.contains("upper") ? j.at("upper").get<double>() : 1.0;
            return TruncatedNormalSpec(detail::require_number(j, "location", "dist.truncated_normal"),
                                       detail::require_number(j, "scale", "dist.truncated_normal"),
                                       lower, upper);
        }
        if (kind == "cmm3") {
            return cmm3_wide(detail::require_number(j, "mu1", "dist.cmm3"),
                             detail::require_number(j, "mu3", "dist.cmm3"));
        }
        if (kind == "point") {
            return PointMassSpec(detail::require_number(j, "p", "dist.point"));
        }
        if (kind == "mixture") {
            if (!j.contains("components") || !j.at("components").is_array()) {
                throw UsageError("dist.mixture: missing 'components' array");
            }
            std::vector<MixtureSpec::Entry> entries;
            for (const auto& e : j.at("components")) {
                json cj = e.contains("component") ? e.at("component") : json();
                auto inner = dist_from_json(cj);
                MixtureComponent component = [&]() -> MixtureComponent {
                    if (const auto* beta = std::get_if<BetaSpec>(&inner)) return *beta;
                    if (const auto* tn = std::get_if<TruncatedNormalSpec>(&inner)) return *tn;
                    throw UsageError("dist.mixture: components must be beta or truncated_normal");
                }();
                entries.push_back({detail::require_number(e, "weight", "dist.mixture"), component});
            }
            return MixtureSpec(std::move(entries));
        }
    } catch (const DomainError& e) {
        throw UsageError(std::string("dist: ") + e.what());
    }
    throw UsageError("dist: unknown kind '" + kind + "'");
}

// Compact flag form, e.g. beta:2,2 | beta-ms:0.52,0.15 | tnorm:0.5,0.12 |
// cmm3:0.3,0.9 | point:0.7
inline CompetenceDistribution dist_from_flag(const std::string& text) {
    auto colon = text.find(':');
    std::string kind = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::string rest = text.substr(colon + 1);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            std::size_t comma = rest.find(',', pos);
            std::string tok = rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
            try {
                args.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw UsageError("--dist: bad number '" + tok + "' in '" + text + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    auto need = [&](std::size_t count) {
        if (args.size() != count) {
            throw UsageError("--dist " + kind + ": expected " + std::to_string(count) +
                             " comma-separated numbers");
        }
    };
    try {
        if (kind == "beta") {
            need(2);
            return BetaSpec(args[0], args[1]);
        }
        if (kind == "beta-ms") {
            need(2);
            return beta_from_mu_sigma({args[0], args[1]});
        }
        if (kind == "tnorm") {
            need(2);
            return TruncatedNormalSpec(args[0], args[1]);
        }
        if (kind == "cmm3") {
            need(2);
            return cmm3_wide(args[0], args[1]);
        }
        if (kind == "point") {
            need(1);
            return PointMassSpec(args[0]);
        }
    } catch (const DomainError& e) {
        throw UsageError(std::string("--dist: ") + e.what());
    }
    throw UsageError("--dist: unknown kind '" + kind +
                     "' (expected beta, beta-ms, tnorm, cmm3, or point)");
}

inline WeightMapKind weight_map_kind_from_string(const std::string& name) {
    if (name == "linear") return WeightMapKind::linear;
    if (name == "power") return WeightMapKind::power;
    if (name == "logodds" || name == "log_odds") return WeightMapKind::log_odds;
    if (name == "unit") return WeightMapKind::unit;
    throw UsageError("weight map: unknown kind '" + name + "'");
}

inline VarianceMode variance_mode_from_string(const std::string& name) {
    if (name == "paper") return VarianceMode::paper;
    if (name == "total" || name == "total_variance") return VarianceMode::total_variance;
    throw UsageError("variance mode: expected 'paper' or 'total_variance', got '" + name + "'");
}

inline VoteRule rule_from_string(const std::string& name) {
    if (name == "escm") return VoteRule::escm;
    if (name == "cjt" || name == "cjt_majority") return VoteRule::cjt_majority;
    if (name == "np" || name == "nitzan_paroush" || name == "nitzan_paroush_oracle") {
        return VoteRule::nitzan_paroush_oracle;
    }
    if (name == "likelihood" || name == "likelihood_oracle") return VoteRule::likelihood_oracle;
    throw UsageError("rule: unknown rule '" + name + "'");
}

inline json params_to_json(const MechanismParams& p) {
    return {{"q", p.q},
            {"l_w", p.l_w},
            {"l_r", p.l_r},
            {"l_a", p.l_a},
            {"m", p.m},
            {"s_min", p.s_min},
            {"review_threshold", p.review_threshold},
            {"map",
             {{"kind", to_string(p.weight_map.kind)},
              {"k", p.weight_map.k},
              {"epsilon", p.weight_map.epsilon}}},
            {"difficulty_modulated", p.difficulty_modulated}};
}

inline void params_from_json(const json& j, MechanismParams& p) {
    if (!j.is_object()) throw UsageError("params: expected an object");
    auto get_int = [&](const char* key, int& field) {
        if (j.contains(key)) field = j.at(key).get<int>();
    };
    get_int("q", p.q);
    get_int("l_w", p.l_w);
    get_int("l_r", p.l_r);
    get_int("l_a", p.l_a);
    get_int("m", p.m);
    if (j.contains("s_min")) p.s_min = j.at("s_min").get<double>();
    if (j.contains("review_threshold")) p.review_threshold = j.at("review_threshold").get<double>();
    if (j.contains("difficulty_modulated")) {
        p.difficulty_modulated = j.at("difficulty_modulated").get<bool>();
    }
    if (j.contains("map")) {
        const auto& m = j.at("map");
        if (m.contains("kind")) {
            p.weight_map.kind = weight_map_kind_from_string(m.at("kind").get<std::string>());
        }
        if (m.contains("k")) p.weight_map.k = m.at("k").get<double>();
        if (m.contains("epsilon")) p.weight_map.epsilon = m.at("epsilon").get<double>();
    }
}

inline json axis_to_json(const AxisSpec& axis) {
    return {{"name", axis.name}, {"min", axis.min}, {"max", axis.max}, {"steps", axis.steps}};
}

inline void axis_from_json(const json& j, AxisSpec& axis) {
    if (j.contains("name")) axis.name = j.at("name").get<std::string>();
    if (j.contains("min")) axis.min = j.at("min").get<double>();
    if (j.contains("max")) axis.max = j.at("max").get<double>();
    if (j.contains("steps")) axis.steps = j.at("steps").get<int>();
}

}  // namespace escm
