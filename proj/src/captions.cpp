#include "pforge/captions.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "pforge/error.hpp"
#include "pforge/manifest.hpp"

namespace pforge {
namespace {

const std::regex& placeholder_re() {
  static const std::regex re(R"(\{(obj_([0-9]+)|bg|extra)\})");
  return re;
}

std::string collapse_ws(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

void check_text(const std::string& text, const char* what) {
  if (collapse_ws(text).empty()) throw InvariantError(std::string("empty ") + what + " description");
  for (auto tok : {kObjOpen, kObjClose, kBgOpen, kBgClose})
    if (text.find(tok) != std::string::npos)
      throw InvariantError(std::string(what) + " description contains the token " + std::string(tok));
}

bool has_placeholder(const CaptionTemplate& t, const std::string& name) {
  return t.body.find("{" + name + "}") != std::string::npos;
}

CaptionTemplate generated_template(int n) {
  CaptionTemplate t;
  t.id = "generated-" + std::to_string(n);
  t.style = "generated";
  if (n == 0) {
    t.body = "A scene of {bg}. {extra}";
    return t;
  }
  std::string list;
  for (int i = 1; i <= n; ++i) {
    if (i > 1) list += i == n ? " and " : ", ";
    list += "{obj_" + std::to_string(i) + "}";
  }
  t.body = "A composition of " + list + " set in {bg}. {extra}";
  return t;
}

}  // namespace

int template_object_count(const CaptionTemplate& t) {
  std::set<int> seen;
  int bg = 0;
  for (auto it = std::sregex_iterator(t.body.begin(), t.body.end(), placeholder_re());
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[1] == "bg") {
      if (++bg > 1) throw InvariantError("template '" + t.id + "' repeats {bg}");
    } else if (m[2].matched) {
      const int i = std::stoi(m[2].str());
      if (!seen.insert(i).second)
        throw InvariantError("template '" + t.id + "' repeats {obj_" + std::to_string(i) + "}");
    }
  }
  int expect = 1;
  for (int i : seen)
    if (i != expect++)
      throw InvariantError("template '" + t.id + "' object placeholders are not contiguous from 1");
  return static_cast<int>(seen.size());
}

std::string render_caption(const CaptionTemplate& t, const CaptionDirectives& d) {
  const int n = template_object_count(t);
  if (n != static_cast<int>(d.wrapped.size()))
    throw InvariantError("template '" + t.id + "' has " + std::to_string(n) +
                         " object placeholders for " + std::to_string(d.wrapped.size()) +
                         " descriptions");
  for (const auto& w : d.wrapped) check_text(w, "object");
  if (d.background) check_text(*d.background, "background");
  for (const auto& e : d.extras) check_text(e, "extra");

  std::string extra;
  for (const auto& e : d.extras) extra += (extra.empty() ? "" : " ") + e;
  const std::string bg_block =
      d.background ? std::string(kBgOpen) + collapse_ws(*d.background) + std::string(kBgClose) : "";

  std::string out;
  auto last = t.body.cbegin();
  for (auto it = std::sregex_iterator(t.body.begin(), t.body.end(), placeholder_re());
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(last, m[0].first);
    last = m[0].second;
    if (m[1] == "bg") out += " " + bg_block + " ";
    else if (m[1] == "extra") out += " " + extra + " ";
    else {
      const std::size_t i = std::stoul(m[2].str()) - 1;
      out += " " + std::string(kObjOpen) + collapse_ws(d.wrapped[i]) + std::string(kObjClose) + " ";
    }
  }
  out.append(last, t.body.cend());
  if (d.background && !has_placeholder(t, "bg")) out += " " + bg_block;
  if (!extra.empty() && !has_placeholder(t, "extra")) out += " " + extra;

  // Drop the padding spaces placed before punctuation.
  std::string tidy = collapse_ws(out);
  std::string result;
  for (std::size_t i = 0; i < tidy.size(); ++i) {
    if (tidy[i] == ' ' && i + 1 < tidy.size() &&
        (tidy[i + 1] == ',' || tidy[i + 1] == '.' || tidy[i + 1] == ';' || tidy[i + 1] == '!' ||
         tidy[i + 1] == '?'))
      continue;
    result.push_back(tidy[i]);
  }
  return result;
}

std::vector<std::string> validate_caption(std::string_view caption, int n_wrapped, bool has_bg) {
  std::vector<std::string> v;
  bool in_obj = false, in_bg = false;
  std::size_t obj_start = 0, bg_start = 0;
  int obj_blocks = 0, bg_blocks = 0;
  const std::string_view tokens[] = {kObjOpen, kObjClose, kBgOpen, kBgClose};

  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i)
      if (!std::isspace(static_cast<unsigned char>(caption[i]))) return false;
    return true;
  };

  std::size_t pos = 0;
  while (true) {
    std::size_t best = std::string_view::npos;
    int which = -1;
    for (int i = 0; i < 4; ++i) {
      const std::size_t p = caption.find(tokens[i], pos);
      if (p < best) {
        best = p;
        which = i;
      }
    }
    if (which < 0) break;
    const std::size_t after = best + tokens[which].size();
    switch (which) {
      case 0:
        if (in_obj) v.push_back("nested OBJ");
        else if (in_bg) v.push_back("nested OBJ inside BG");
        in_obj = true;
        obj_start = after;
        break;
      case 1:
        if (!in_obj) {
          v.push_back("unbalanced </OBJ>");
          break;
        }
        if (blank(obj_start, best)) v.push_back("empty OBJ block");
        in_obj = false;
        ++obj_blocks;
        break;
      case 2:
        if (in_bg) v.push_back("nested BG");
        else if (in_obj) v.push_back("nested BG inside OBJ");
        in_bg = true;
        bg_start = after;
        break;
      case 3:
        if (!in_bg) {
          v.push_back("unbalanced </BG>");
          break;
        }
        if (blank(bg_start, best)) v.push_back("empty BG block");
        in_bg = false;
        ++bg_blocks;
        break;
    }
    pos = after;
  }
  if (in_obj) v.push_back("unclosed <OBJ>");
  if (in_bg) v.push_back("unclosed <BG>");
  if (obj_blocks != n_wrapped)
    v.push_back("count mismatch: " + std::to_string(obj_blocks) + " OBJ blocks, expected " +
                std::to_string(n_wrapped));
  if (bg_blocks != (has_bg ? 1 : 0))
    v.push_back("count mismatch: " + std::to_string(bg_blocks) + " BG blocks, expected " +
                std::to_string(has_bg ? 1 : 0));
  return v;
}

std::vector<CaptionTemplate> load_templates(const std::filesystem::path& path) {
  Json doc = read_json(path);
  if (doc.is_object()) {
    check_schema_version(doc, "templates");
    doc = doc.at("templates");
  }
  if (!doc.is_array()) throw SchemaError("templates: expected an array");
  std::vector<CaptionTemplate> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto where = "templates[" + std::to_string(i) + "]";
    try {
      CaptionTemplate t{doc[i].at("id").get<std::string>(), doc[i].value("style", std::string()),
                        doc[i].at("body").get<std::string>()};
      if (!ids.insert(t.id).second) throw SchemaError(where + ".id: duplicate '" + t.id + "'");
      template_object_count(t);
      out.push_back(std::move(t));
    } catch (const Json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  return out;
}

const std::vector<CaptionTemplate>& default_templates() {
  static const std::vector<CaptionTemplate> lib = {
      {"studio-1", "studio", "A product shot of {obj_1} placed in {bg}. {extra}"},
      {"studio-2", "studio", "A product shot of {obj_1} next to {obj_2} in {bg}. {extra}"},
      {"studio-3", "studio", "A product shot of {obj_1}, {obj_2} and {obj_3} arranged in {bg}. {extra}"},
      {"lifestyle-1", "lifestyle", "{obj_1} in {bg}. {extra}"},
      {"lifestyle-2", "lifestyle", "{obj_1} together with {obj_2} in {bg}. {extra}"},
      {"ad-1", "ad", "An advertisement featuring {obj_1} over {bg}. {extra}"},
      {"ad-2", "ad", "An advertisement featuring {obj_1} and {obj_2} over {bg}. {extra}"},
  };
  return lib;
}

CaptionTemplate choose_template(const std::vector<CaptionTemplate>& library, const std::string& id,
                                int n_objects) {
  auto it = std::find_if(library.begin(), library.end(),
                         [&](const CaptionTemplate& t) { return t.id == id; });
  if (it != library.end()) {
    if (template_object_count(*it) == n_objects) return *it;
    for (const auto& t : library)
      if (t.style == it->style && template_object_count(t) == n_objects) return t;
  }
  return generated_template(n_objects);
}

}  // namespace pforge
