#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kgalign {

enum class Role {
    Proponent,
    Opponent,
    Referee,
    Alias,
    Type,
    Attribute,
    Neighborhood,
    Attack,
    Judge,
};

inline constexpr std::array<Role, 9> kAllRoles = {
    Role::Proponent, Role::Opponent,  Role::Referee, Role::Alias, Role::Type,
    Role::Attribute, Role::Neighborhood, Role::Attack, Role::Judge,
};

const char* role_name(Role role);

// Pre-rendered entity description fed into prompts.
struct ProfileText {
    std::uint64_t id = 0;
    std::string name;
    std::string attributes;  // "key: value; key: value"
    std::string relations;   // "relation|neighbor; relation|neighbor"
};

struct PromptContext {
    ProfileText source;
    std::vector<ProfileText> candidates;
    int round = 1;
    // Role-dependent sections; render fails loudly when a required one is
    // missing rather than emitting placeholder residue.
    std::optional<std::string> proponent_output;       // referee
    std::optional<std::string> opponent_output;        // referee
    std::optional<std::string> sim_priors;             // judge
    std::optional<std::string> current_round_outputs;  // judge
    std::optional<std::string> prior_round_outputs;    // attack (round >= 2), judge
};

// Role templates are external text assets pinned by SHA-256 so fidelity is
// testable; identical copies are compiled in as the default.
class PromptLibrary {
public:
    // Built-in templates (verified against the pinned checksums on first use).
    static const PromptLibrary& builtin();

    // Loads <dir>/<role>.txt for all nine roles and verifies checksums.
    static PromptLibrary load(const std::string& dir, bool verify_checksums = true);

    const std::string& text(Role role) const;

private:
    std::array<std::string, 9> texts_;
};

const char* pinned_prompt_sha256(Role role);

// Deterministic prompt assembly. <CANDIDATE_ID_LIST> is substituted with the
// ascending candidate ids; context blocks follow the template.
std::string render_prompt(const PromptLibrary& lib, Role role, const PromptContext& ctx);

} // namespace kgalign
