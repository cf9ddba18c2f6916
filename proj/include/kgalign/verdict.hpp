#pragma once

#include "kgalign/prompts.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kgalign {

enum class Align { True, False, Abstain };

const char* align_name(Align a);

struct AgentVerdict {
    Role role = Role::Proponent;
    std::uint64_t candidate = 0;
    std::optional<double> score;  // clamped to [0,1]; absent scores are
                                  // excluded from aggregate means
    Align align = Align::Abstain;
    std::string evidence;
};

struct AttackVerdict {
    std::uint64_t candidate = 0;
    std::vector<std::string> issues;
    std::string evidence;
    double penalty = 0.0;  // [0,1]
};

struct JudgeAdjustment {
    std::uint64_t candidate = 0;
    double delta = 0.0;  // clamped to [-0.2, 0.2]
    std::string note;    // truncated to 40 characters
};

struct JudgeVerdict {
    // Absent when the judge endorsed nothing usable; the engine substitutes
    // the current aggregate leader.
    std::optional<std::uint64_t> endorse;
    std::vector<JudgeAdjustment> adjustments;
    // A_judge,v. The judge output schema does not carry it explicitly, so an
    // optional "verdict"/"align" boolean is honored and absence reads False.
    bool verdict_flag = false;
};

// Result of one parse attempt. Exactly one of the payloads is populated,
// selected by the role. `ok == false` means the text was unusable even after
// fence stripping and one bracket-balancing repair pass; the caller retries
// the agent call and eventually substitutes all-Abstain.
struct ParsedVerdicts {
    bool ok = false;
    std::string error;
    std::vector<AgentVerdict> agents;     // score roles and specialists
    std::vector<AttackVerdict> attacks;   // attack role
    std::optional<JudgeVerdict> judge;    // judge role
    std::vector<std::string> warnings;    // clamps, drops, fills
};

// Total over arbitrary byte strings: returns verdicts or a typed error,
// never throws. Missing candidates are Abstain-filled (zero-penalty for the
// attack role); extra candidates are dropped with a warning; scores, deltas
// and penalties are clamped into range.
ParsedVerdicts parse_verdicts(const std::string& raw,
                              const std::vector<std::uint64_t>& expected_ids, Role role);

// All-Abstain substitute used after repeated parse failures.
ParsedVerdicts abstain_fill(const std::vector<std::uint64_t>& expected_ids, Role role);

} // namespace kgalign
