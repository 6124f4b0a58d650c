#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pforge {

inline constexpr std::string_view kObjOpen = "<OBJ>";
inline constexpr std::string_view kObjClose = "</OBJ>";
inline constexpr std::string_view kBgOpen = "<BG>";
inline constexpr std::string_view kBgClose = "</BG>";

/// Body placeholders: {obj_1}..{obj_n}, {bg}, {extra}.
struct CaptionTemplate {
  std::string id;
  std::string style;
  std::string body;
};

struct CaptionDirectives {
  /// Descriptions wrapped in <OBJ> blocks, in conditioning-image order.
  std::vector<std::string> wrapped;
  std::optional<std::string> background;
  /// Unwrapped text: design-element descriptions and edit notes.
  std::vector<std::string> extras;
};

/// Highest {obj_i} index; throws if indices are not contiguous from 1, or
/// if {bg} or an {obj_i} repeats.
int template_object_count(const CaptionTemplate& t);

/// Fills the template. Extras go into {extra} (appended when the template
/// has none); whitespace collapses to single spaces. Throws on a count
/// mismatch, empty descriptions or descriptions containing token literals.
std::string render_caption(const CaptionTemplate& t, const CaptionDirectives& d);

/// Grammar violations; empty means the caption is well formed.
std::vector<std::string> validate_caption(std::string_view caption, int n_wrapped, bool has_bg);

/// templates.json: a bare array or {schema, templates:[...]}.
std::vector<CaptionTemplate> load_templates(const std::filesystem::path& path);

/// Built-in library used when no template file is configured.
const std::vector<CaptionTemplate>& default_templates();

/// Template `id` when it fits n_objects; otherwise the first of the same
/// style that does; otherwise a generated plain listing.
CaptionTemplate choose_template(const std::vector<CaptionTemplate>& library, const std::string& id,
                                int n_objects);

}  // namespace pforge
