#include "kgalign/verdict.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace kgalign {

const char* align_name(Align a) {
    switch (a) {
        case Align::True: return "true";
        case Align::False: return "false";
        case Align::Abstain: return "abstain";
    }
    return "abstain";
}

namespace {

using nlohmann::json;

bool is_score_role(Role role) {
    return role == Role::Proponent || role == Role::Opponent || role == Role::Referee;
}

// Cuts the payload out of fenced blocks or surrounding prose.
std::string strip_to_payload(const std::string& raw, bool expect_object) {
    std::string text = raw;
    auto fence = text.find("```");
    if (fence != std::string::npos) {
        std::size_t start = fence + 3;
        // Skip an optional language tag up to the first newline.
        auto nl = text.find('\n', start);
        auto close = text.find("```", start);
        if (nl != std::string::npos && (close == std::string::npos || nl < close)) {
            start = nl + 1;
        }
        close = text.find("```", start);
        text = close == std::string::npos ? text.substr(start) : text.substr(start, close - start);
    }
    char open = expect_object ? '{' : '[';
    char shut = expect_object ? '}' : ']';
    auto first = text.find(open);
    if (first == std::string::npos) {
        return text;
    }
    auto last = text.rfind(shut);
    if (last != std::string::npos && last > first) {
        return text.substr(first, last - first + 1);
    }
    return text.substr(first);
}

// One bounded repair pass: drop a trailing comma and append whatever closers
// are still open. String state is tracked so brackets inside values are
// ignored.
std::string balance_brackets(const std::string& text) {
    std::vector<char> stack;
    bool in_string = false;
    bool escaped = false;
    for (char c : text) {
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '[': stack.push_back(']'); break;
            case '{': stack.push_back('}'); break;
            case ']':
            case '}':
                if (!stack.empty() && stack.back() == c) {
                    stack.pop_back();
                }
                break;
            default: break;
        }
    }
    std::string repaired = text;
    while (!repaired.empty() &&
           (std::isspace(static_cast<unsigned char>(repaired.back())) || repaired.back() == ',')) {
        repaired.pop_back();
    }
    if (in_string) {
        repaired.push_back('"');
    }
    while (!stack.empty()) {
        repaired.push_back(stack.back());
        stack.pop_back();
    }
    return repaired;
}

std::optional<std::uint64_t> parse_candidate_id(const json& j) {
    if (j.is_number_unsigned()) {
        return j.get<std::uint64_t>();
    }
    if (j.is_number_integer()) {
        auto v = j.get<std::int64_t>();
        if (v < 0) return std::nullopt;
        return static_cast<std::uint64_t>(v);
    }
    if (j.is_string()) {
        const std::string& s = j.get_ref<const std::string&>();
        if (s.empty()) return std::nullopt;
        std::uint64_t v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
        }
        return v;
    }
    return std::nullopt;
}

std::optional<double> parse_number(const json& j) {
    if (j.is_number()) {
        double v = j.get<double>();
        return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
    }
    if (j.is_string()) {
        try {
            std::size_t pos = 0;
            double v = std::stod(j.get_ref<const std::string&>(), &pos);
            if (pos == j.get_ref<const std::string&>().size() && std::isfinite(v)) {
                return v;
            }
        } catch (...) {
        }
    }
    return std::nullopt;
}

double clamp_unit(double v, std::uint64_t candidate, const char* what,
                  std::vector<std::string>& warnings) {
    if (v < 0.0 || v > 1.0) {
        double clamped = std::clamp(v, 0.0, 1.0);
        warnings.push_back(std::string(what) + " " + std::to_string(v) + " for candidate " +
                           std::to_string(candidate) + " clamped to " + std::to_string(clamped));
        return clamped;
    }
    return v;
}

std::optional<Align> parse_align(const json& j) {
    if (j.is_boolean()) {
        return j.get<bool>() ? Align::True : Align::False;
    }
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (s == "true") return Align::True;
        if (s == "false") return Align::False;
        if (s == "abstain") return Align::Abstain;
    }
    return std::nullopt;
}

std::optional<bool> parse_bool(const json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (s == "true") return true;
        if (s == "false") return false;
    }
    return std::nullopt;
}

ParsedVerdicts parse_failure(std::string message) {
    ParsedVerdicts out;
    out.ok = false;
    out.error = std::move(message);
    return out;
}

ParsedVerdicts parse_array_role(const json& parsed, const std::vector<std::uint64_t>& expected,
                                Role role) {
    json arr = parsed;
    if (arr.is_object()) {
        arr = json::array({parsed});
    }
    if (!arr.is_array()) {
        return parse_failure("expected a JSON array for role " + std::string(role_name(role)));
    }

    ParsedVerdicts out;
    out.ok = true;
    std::set<std::uint64_t> expected_set(expected.begin(), expected.end());
    std::set<std::uint64_t> seen;

    std::map<std::uint64_t, AgentVerdict> agents;
    std::map<std::uint64_t, AttackVerdict> attacks;

    for (const auto& entry : arr) {
        if (!entry.is_object()) {
            out.warnings.push_back("non-object array entry dropped");
            continue;
        }
        auto id_it = entry.find("candidate_id");
        if (id_it == entry.end()) id_it = entry.find("candidate");
        if (id_it == entry.end()) {
            out.warnings.push_back("entry without candidate id dropped");
            continue;
        }
        auto id = parse_candidate_id(*id_it);
        if (!id) {
            out.warnings.push_back("unparseable candidate id dropped");
            continue;
        }
        if (!expected_set.count(*id)) {
            out.warnings.push_back("unexpected candidate " + std::to_string(*id) + " dropped");
            continue;
        }
        if (!seen.insert(*id).second) {
            out.warnings.push_back("duplicate entry for candidate " + std::to_string(*id) +
                                   " dropped");
            continue;
        }

        if (role == Role::Attack) {
            AttackVerdict v;
            v.candidate = *id;
            if (auto it = entry.find("issues"); it != entry.end() && it->is_array()) {
                for (const auto& issue : *it) {
                    if (issue.is_string()) v.issues.push_back(issue.get<std::string>());
                }
            }
            if (auto it = entry.find("evidence"); it != entry.end() && it->is_string()) {
                v.evidence = it->get<std::string>();
            }
            if (auto it = entry.find("penalty"); it != entry.end()) {
                if (auto p = parse_number(*it)) {
                    v.penalty = clamp_unit(*p, *id, "penalty", out.warnings);
                } else {
                    out.warnings.push_back("unparseable penalty for candidate " +
                                           std::to_string(*id) + " treated as 0");
                }
            }
            attacks.emplace(*id, std::move(v));
            continue;
        }

        AgentVerdict v;
        v.role = role;
        v.candidate = *id;
        auto score_it = entry.find(is_score_role(role) ? "align_score" : "score");
        if (score_it == entry.end()) {
            score_it = entry.find(is_score_role(role) ? "score" : "align_score");
        }
        if (score_it != entry.end()) {
            if (auto s = parse_number(*score_it)) {
                v.score = clamp_unit(*s, *id, "score", out.warnings);
            } else {
                out.warnings.push_back("unparseable score for candidate " + std::to_string(*id));
            }
        }
        if (auto it = entry.find("align"); it != entry.end()) {
            if (auto a = parse_align(*it)) {
                v.align = *a;
            } else {
                out.warnings.push_back("unparseable align for candidate " + std::to_string(*id) +
                                       " treated as abstain");
                v.align = Align::Abstain;
            }
        } else if (v.score) {
            // Score roles emit no align field; derive one from the score.
            v.align = *v.score >= 0.5 ? Align::True : Align::False;
        }
        if (auto it = entry.find("evidence"); it != entry.end() && it->is_string()) {
            v.evidence = it->get<std::string>();
        }
        // A scoreless entry that does not explicitly align is an abstention.
        if (!v.score && entry.find("align") == entry.end()) {
            v.align = Align::Abstain;
        }
        agents.emplace(*id, std::move(v));
    }

    for (std::uint64_t id : expected) {
        if (role == Role::Attack) {
            if (!attacks.count(id)) {
                AttackVerdict v;
                v.candidate = id;
                attacks.emplace(id, v);
                out.warnings.push_back("candidate " + std::to_string(id) +
                                       " missing from attack output; zero penalty");
            }
        } else if (!agents.count(id)) {
            AgentVerdict v;
            v.role = role;
            v.candidate = id;
            v.align = Align::Abstain;
            agents.emplace(id, v);
            out.warnings.push_back("candidate " + std::to_string(id) +
                                   " missing from output; abstain-filled");
        }
    }

    if (role == Role::Attack) {
        for (auto& [_, v] : attacks) out.attacks.push_back(std::move(v));
    } else {
        for (auto& [_, v] : agents) out.agents.push_back(std::move(v));
    }
    return out;
}

ParsedVerdicts parse_judge(const json& parsed, const std::vector<std::uint64_t>& expected) {
    json obj = parsed;
    if (obj.is_array()) {
        if (obj.empty() || !obj[0].is_object()) {
            return parse_failure("judge output is not a JSON object");
        }
        obj = obj[0];
    }
    if (!obj.is_object()) {
        return parse_failure("judge output is not a JSON object");
    }

    ParsedVerdicts out;
    out.ok = true;
    JudgeVerdict v;
    std::set<std::uint64_t> expected_set(expected.begin(), expected.end());

    if (auto it = obj.find("endorse"); it != obj.end()) {
        auto id = parse_candidate_id(*it);
        if (id && expected_set.count(*id)) {
            v.endorse = *id;
        } else {
            out.warnings.push_back("judge endorsement outside candidate subset ignored");
        }
    } else {
        out.warnings.push_back("judge output without endorsement");
    }

    if (auto it = obj.find("adjustments"); it != obj.end() && it->is_array()) {
        for (const auto& adj : *it) {
            if (!adj.is_object()) continue;
            auto id_it = adj.find("candidate_id");
            if (id_it == adj.end()) id_it = adj.find("candidate");
            if (id_it == adj.end()) continue;
            auto id = parse_candidate_id(*id_it);
            if (!id || !expected_set.count(*id)) {
                out.warnings.push_back("adjustment for unknown candidate dropped");
                continue;
            }
            JudgeAdjustment a;
            a.candidate = *id;
            if (auto d_it = adj.find("delta"); d_it != adj.end()) {
                if (auto d = parse_number(*d_it)) {
                    if (*d < -0.2 || *d > 0.2) {
                        out.warnings.push_back("judge delta " + std::to_string(*d) +
                                               " clamped to [-0.2, 0.2]");
                    }
                    a.delta = std::clamp(*d, -0.2, 0.2);
                }
            }
            if (auto n_it = adj.find("note"); n_it != adj.end() && n_it->is_string()) {
                a.note = n_it->get<std::string>();
                if (a.note.size() > 40) {
                    a.note.resize(40);
                    out.warnings.push_back("judge note truncated to 40 characters");
                }
            }
            v.adjustments.push_back(std::move(a));
        }
    }

    if (auto it = obj.find("verdict"); it != obj.end()) {
        if (auto b = parse_bool(*it)) v.verdict_flag = *b;
    } else if (auto it2 = obj.find("align"); it2 != obj.end()) {
        if (auto b = parse_bool(*it2)) v.verdict_flag = *b;
    }

    out.judge = std::move(v);
    return out;
}

} // namespace

ParsedVerdicts parse_verdicts(const std::string& raw,
                              const std::vector<std::uint64_t>& expected_ids, Role role) {
    if (expected_ids.empty()) {
        return parse_failure("expected_ids must not be empty");
    }
    bool expect_object = role == Role::Judge;
    std::string payload = strip_to_payload(raw, expect_object);
    json parsed = json::parse(payload, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
        parsed = json::parse(balance_brackets(payload), nullptr, false);
    }
    if (parsed.is_discarded()) {
        return parse_failure("unparseable " + std::string(role_name(role)) +
                             " output after fence stripping and bracket repair");
    }
    if (role == Role::Judge) {
        return parse_judge(parsed, expected_ids);
    }
    return parse_array_role(parsed, expected_ids, role);
}

ParsedVerdicts abstain_fill(const std::vector<std::uint64_t>& expected_ids, Role role) {
    ParsedVerdicts out;
    out.ok = true;
    out.warnings.push_back("substituted all-abstain verdicts for role " +
                           std::string(role_name(role)));
    if (role == Role::Attack) {
        for (std::uint64_t id : expected_ids) {
            AttackVerdict v;
            v.candidate = id;
            out.attacks.push_back(v);
        }
    } else if (role == Role::Judge) {
        out.judge = JudgeVerdict{};
    } else {
        for (std::uint64_t id : expected_ids) {
            AgentVerdict v;
            v.role = role;
            v.candidate = id;
            v.align = Align::Abstain;
            out.agents.push_back(v);
        }
    }
    return out;
}

} // namespace kgalign
