#pragma once

// JSON shapes for AnalyticBounds and RunReport. Field names follow the C++
// members; probabilities are plain doubles.

#include "json.hpp"

#include "npqv/experiments.hpp"
#include "npqv/photonics.hpp"
#include "npqv/protocol.hpp"

namespace npqv {

inline void to_json(nlohmann::json& j, const ClickProbabilities& p) {
    j = nlohmann::json{{"p_c", p.p_c},   {"p_w", p.p_w}, {"p_dc", p.p_dc},    {"p_none", p.p_none},
                       {"p_h", p.p_h}, {"p_d", p.p_d}, {"p_dark", p.p_dark}};
}

inline void from_json(const nlohmann::json& j, ClickProbabilities& p) {
    j.at("p_c").get_to(p.p_c);
    j.at("p_w").get_to(p.p_w);
    j.at("p_dc").get_to(p.p_dc);
    j.at("p_none").get_to(p.p_none);
    j.at("p_h").get_to(p.p_h);
    j.at("p_d").get_to(p.p_d);
    j.at("p_dark").get_to(p.p_dark);
}

inline void to_json(nlohmann::json& j, const AnalyticBounds& b) {
    j = nlohmann::json{{"clicks", b.clicks},
                       {"p_Y", b.p_Y},
                       {"p_N", b.p_N},
                       {"T_C", b.T_C},
                       {"T_S", b.T_S},
                       {"T", b.T},
                       {"completeness_lb", b.completeness_lb},
                       {"soundness_ub", b.soundness_ub},
                       {"gap", b.gap},
                       {"separated", b.separated}};
}

inline void from_json(const nlohmann::json& j, AnalyticBounds& b) {
    j.at("clicks").get_to(b.clicks);
    j.at("p_Y").get_to(b.p_Y);
    j.at("p_N").get_to(b.p_N);
    j.at("T_C").get_to(b.T_C);
    j.at("T_S").get_to(b.T_S);
    j.at("T").get_to(b.T);
    j.at("completeness_lb").get_to(b.completeness_lb);
    j.at("soundness_ub").get_to(b.soundness_ub);
    j.at("gap").get_to(b.gap);
    j.at("separated").get_to(b.separated);
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
    j = nlohmann::json{{"role", r.role},
                       {"mode", r.mode},
                       {"n", r.n},
                       {"m", r.m},
                       {"nu", r.nu},
                       {"mu", r.mu},
                       {"delta", r.delta},
                       {"total_single_clicks", r.total_single_clicks},
                       {"correct_clicks", r.correct_clicks},
                       {"double_clicks", r.double_clicks},
                       {"missing_bits", r.missing_bits},
                       {"threshold", r.threshold},
                       {"satisfied_clauses", r.satisfied_clauses},
                       {"verdict", r.verdict ? "accept" : "reject"},
                       {"completeness_lb", r.completeness_lb},
                       {"soundness_ub", r.soundness_ub},
                       {"gap", r.gap},
                       {"log2_classical_ops", r.log2_classical_ops},
                       {"seed", r.seed}};
}

inline void from_json(const nlohmann::json& j, RunReport& r) {
    j.at("role").get_to(r.role);
    j.at("mode").get_to(r.mode);
    j.at("n").get_to(r.n);
    j.at("m").get_to(r.m);
    j.at("nu").get_to(r.nu);
    j.at("mu").get_to(r.mu);
    j.at("delta").get_to(r.delta);
    j.at("total_single_clicks").get_to(r.total_single_clicks);
    j.at("correct_clicks").get_to(r.correct_clicks);
    j.at("double_clicks").get_to(r.double_clicks);
    j.at("missing_bits").get_to(r.missing_bits);
    j.at("threshold").get_to(r.threshold);
    j.at("satisfied_clauses").get_to(r.satisfied_clauses);
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict != "accept" && verdict != "reject") {
        throw InputError("verdict must be 'accept' or 'reject'");
    }
    r.verdict = verdict == "accept";
    j.at("completeness_lb").get_to(r.completeness_lb);
    j.at("soundness_ub").get_to(r.soundness_ub);
    j.at("gap").get_to(r.gap);
    j.at("log2_classical_ops").get_to(r.log2_classical_ops);
    j.at("seed").get_to(r.seed);
}

} // namespace npqv
