#include "kgalign/prompts.hpp"

#include "kgalign/error.hpp"
#include "kgalign/hash.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "prompt_texts.inc"

namespace kgalign {

namespace {

constexpr std::size_t role_index(Role role) {
    return static_cast<std::size_t>(role);
}

const std::array<const char*, 9> kRoleNames = {
    "proponent", "opponent", "referee", "alias", "type",
    "attribute", "neighborhood", "attack", "judge",
};

const std::array<const char*, 9> kPinnedSha256 = {
    "49ced10cfb65880bf33561ae11e68ef3230bef976ff179e1e4896fd2aed8bb11",  // proponent
    "312183649a5becf43b8a64f5ce647abbe73404084a2c85c08e652d809f46e497",  // opponent
    "175eeddebeb5d1e49aa27561a1ac7218b3a345520db44b7bea4372834561ac6c",  // referee
    "06defb340aed4dd3e9f6e22ab26ba25851e9adfd069109c49ef190fe2a71da01",  // alias
    "e5eb1c98ef416e1a9e04ba457811709cead346e54e4513b043d19c1a7fc99752",  // type
    "898fe573732181a58582fe76f2e9f196d9a09a31704686ddbe2640a83173b4dc",  // attribute
    "bc9109db574825dfe08c8fadfab63c1ab6e74d024192099df4c26855ba74efa6",  // neighborhood
    "656a12040215247bae2bd49b770a5861df4ddf3ace7731ef55843b4f47942325",  // attack
    "335e2c0fb29e40cf6928e127070d3cf53324dddac148a773e1450af18f3aab1a",  // judge
};

void verify_checksum(Role role, const std::string& text, const std::string& origin) {
    std::string actual = sha256_hex(text);
    if (actual != kPinnedSha256[role_index(role)]) {
        throw_config("prompt template for role '" + std::string(role_name(role)) + "' from " +
                     origin + " does not match pinned checksum (got " + actual + ")");
    }
}

} // namespace

const char* role_name(Role role) {
    return kRoleNames[role_index(role)];
}

const char* pinned_prompt_sha256(Role role) {
    return kPinnedSha256[role_index(role)];
}

const PromptLibrary& PromptLibrary::builtin() {
    static const PromptLibrary lib = [] {
        PromptLibrary l;
        l.texts_ = {kPromptTextProponent, kPromptTextOpponent,  kPromptTextReferee,
                    kPromptTextAlias,     kPromptTextType,      kPromptTextAttribute,
                    kPromptTextNeighborhood, kPromptTextAttack, kPromptTextJudge};
        for (Role r : kAllRoles) {
            verify_checksum(r, l.texts_[role_index(r)], "built-in table");
        }
        return l;
    }();
    return lib;
}

PromptLibrary PromptLibrary::load(const std::string& dir, bool verify_checksums) {
    PromptLibrary lib;
    for (Role r : kAllRoles) {
        std::string path = dir + "/" + role_name(r) + ".txt";
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw_config("cannot open prompt asset: " + path);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        lib.texts_[role_index(r)] = buf.str();
        if (verify_checksums) {
            verify_checksum(r, lib.texts_[role_index(r)], path);
        }
    }
    return lib;
}

const std::string& PromptLibrary::text(Role role) const {
    return texts_[role_index(role)];
}

namespace {

[[noreturn]] void render_error(Role role, const char* field) {
    throw Error(ErrorKind::Internal, "render_prompt(" + std::string(role_name(role)) +
                                         "): missing context field '" + field + "'");
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

// Each role sees only the profile facets its prompt is allowed to judge.
void append_profile(std::string& out, Role role, const ProfileText& p) {
    out += "Name: " + p.name;
    bool attrs = role != Role::Alias && role != Role::Neighborhood;
    bool rels = role != Role::Alias && role != Role::Attribute;
    if (attrs) {
        out += "\nAttributes: " + p.attributes;
    }
    if (rels) {
        out += "\nRelations: " + p.relations;
    }
}

} // namespace

std::string render_prompt(const PromptLibrary& lib, Role role, const PromptContext& ctx) {
    if (ctx.candidates.empty()) {
        render_error(role, "candidates");
    }
    std::vector<const ProfileText*> ordered;
    ordered.reserve(ctx.candidates.size());
    for (const auto& c : ctx.candidates) {
        ordered.push_back(&c);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const ProfileText* a, const ProfileText* b) { return a->id < b->id; });

    std::string id_list;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        if (i) id_list += ", ";
        id_list += std::to_string(ordered[i]->id);
    }

    std::string out = replace_all(lib.text(role), "<CANDIDATE_ID_LIST>", id_list);

    out += "\nSource entity (id " + std::to_string(ctx.source.id) + "):\n";
    append_profile(out, role, ctx.source);
    out += "\n";
    for (const ProfileText* c : ordered) {
        out += "\nCandidate " + std::to_string(c->id) + ":\n";
        append_profile(out, role, *c);
        out += "\n";
    }

    switch (role) {
        case Role::Referee:
            if (!ctx.proponent_output) render_error(role, "proponent_output");
            if (!ctx.opponent_output) render_error(role, "opponent_output");
            out += "\nProponent output:\n" + *ctx.proponent_output + "\n";
            out += "\nOpponent output:\n" + *ctx.opponent_output + "\n";
            break;
        case Role::Judge:
            if (!ctx.sim_priors) render_error(role, "sim_priors");
            if (!ctx.current_round_outputs) render_error(role, "current_round_outputs");
            out += "\nEmbedding similarity:\n" + *ctx.sim_priors + "\n";
            out += "\nAgent outputs:\n" + *ctx.current_round_outputs + "\n";
            if (ctx.prior_round_outputs) {
                out += "\nPrevious round outputs:\n" + *ctx.prior_round_outputs + "\n";
            }
            break;
        case Role::Attack:
            if (ctx.round >= 2 && !ctx.prior_round_outputs) {
                render_error(role, "prior_round_outputs");
            }
            if (ctx.prior_round_outputs) {
                out += "\nPrevious round outputs:\n" + *ctx.prior_round_outputs + "\n";
            }
            break;
        default:
            if (ctx.prior_round_outputs) {
                out += "\nPrevious round outputs:\n" + *ctx.prior_round_outputs + "\n";
            }
            break;
    }
    return out;
}

} // namespace kgalign
