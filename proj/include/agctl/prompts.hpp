#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace agctl {

/// Role-goal-task agent template. Rendering substitutes {placeholder}
/// occurrences in every field and fails on unbound keys.
struct PromptTemplate {
    std::string name;
    std::string role;
    std::string goal;
    std::string backstory;
    std::string task;
    std::string description;
    std::string expected_output;
    std::string note;

    std::vector<std::string> placeholders() const;

    nlohmann::json to_json() const;
    static PromptTemplate from_json(const nlohmann::json& j);
};

struct RenderedPrompt {
    std::string system;  // role + goal + backstory
    std::string user;    // task + description + note + expected output
    std::string text() const { return system + "\n" + user; }
};

using Bindings = std::map<std::string, std::string>;

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const Bindings& bindings);

/// Substitution on raw text, shared by all fields.
std::string substitute_placeholders(const std::string& text, const Bindings& bindings);

class TemplateStore {
public:
    const PromptTemplate& get(const std::string& name) const;
    void put(PromptTemplate tmpl);
    std::vector<std::string> names() const;

    /// Writes one JSON file per template into dir.
    void dump(const std::string& dir) const;
    /// Loads every *.json template file from dir.
    static TemplateStore load(const std::string& dir);

private:
    std::map<std::string, PromptTemplate> templates_;
};

/// The bundled agent/task templates for both case studies.
const TemplateStore& builtin_templates();

}  // namespace agctl
