#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rep::persona {

enum class Cue : std::uint8_t {
    emoticon,
    exclamation,
    first_person_affective,
    question_form,
    suggestion_form,
    third_person_declarative,
    terse,
    assertion_form,
};
inline constexpr std::size_t kCueCount = 8;

std::string_view cue_name(Cue c);
/// Throws NotFound.
Cue cue_from_name(std::string_view name);

using CueCounts = std::array<double, kCueCount>;

/// Surface counts per cue class. `terse` is a shortness bonus, max(0, 12 - words).
CueCounts detect_cues(std::string_view text);

struct Persona {
    std::string id;
    std::string name;
    std::string avatar;
    std::vector<std::string> descriptors;
    std::map<Cue, double> weights;

    /// Throws ValidationError on non-finite weights or no positive weight.
    void validate() const;
    static Persona from_json_text(std::string_view text);
    static Persona load(const std::string& path);
};

double style_score(std::string_view text, const Persona& persona);

struct ResponseTemplate {
    std::string template_id;
    std::vector<std::string> alternatives;

    /// Slot names in the first alternative, sorted.
    std::vector<std::string> slots() const;
    /// Throws ValidationError if empty, a brace is unbalanced or alternatives disagree on slots.
    void validate() const;
};

/// `{"templates": {"id": ["alt", ...], ...}}`
std::map<std::string, ResponseTemplate> parse_templates(std::string_view json_text);
std::map<std::string, ResponseTemplate> load_templates(const std::string& path);

using Slots = std::map<std::string, std::string>;

/// Highest style score wins; ties go to a seeded uniform pick. Throws MissingSlot.
std::string render(const ResponseTemplate& tmpl, const Persona& persona, const Slots& slots, std::uint64_t seed);

std::uint64_t splitmix64(std::uint64_t x);

} // namespace rep::persona
