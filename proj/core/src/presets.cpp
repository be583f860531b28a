#include "synthcity/presets.hpp"

#include <map>
#include <mutex>
#include <string_view>

#include <json.hpp>

#include "synthcity/errors.hpp"
#include "synthcity/grammar.hpp"

namespace synthcity {

namespace detail {
// Defined in the generated presets_data.cpp; maps embedded file names
// (style_a.sg, palettes.json, ...) to their contents.
const std::map<std::string, std::string_view, std::less<>>& preset_data();
}  // namespace detail

namespace {

std::array<float, 3> read_rgb(const nlohmann::json& arr) {
  return {arr.at(0).get<float>(), arr.at(1).get<float>(),
          arr.at(2).get<float>()};
}

StyleConfig build_style(const std::string& id, const nlohmann::json& entry,
                        std::string_view grammar_src) {
  StyleConfig style;
  style.id = id;
  style.grammar = parse_grammar(grammar_src);
  style.grammar.link_check();

  if (entry.contains("building_prob"))
    style.building_prob = entry.at("building_prob").get<double>();
  if (entry.contains("tree_density"))
    style.tree_density = entry.at("tree_density").get<double>();
  if (entry.contains("min_lot_area_m2"))
    style.min_lot_area_m2 = entry.at("min_lot_area_m2").get<double>();
  if (entry.contains("street_setback_m"))
    style.street_setback_m = entry.at("street_setback_m").get<double>();
  if (entry.contains("road_material"))
    style.road_material = entry.at("road_material").get<std::string>();
  if (entry.contains("ground_material"))
    style.ground_material = entry.at("ground_material").get<std::string>();
  if (entry.contains("tree_material"))
    style.tree_material = entry.at("tree_material").get<std::string>();

  for (const auto& m : entry.at("materials")) {
    Material mat;
    mat.name = m.at("name").get<std::string>();
    mat.rgb = read_rgb(m.at("rgb"));
    if (m.contains("stripe")) {
      const auto& s = m.at("stripe");
      Stripe stripe;
      stripe.rgb2 = read_rgb(s.at("rgb2"));
      if (s.contains("period_m"))
        stripe.period_m = s.at("period_m").get<double>();
      if (s.contains("axis"))
        stripe.axis = s.at("axis").get<std::string>().at(0);
      mat.stripe = stripe;
    }
    style.palette.intern(mat);
  }

  style.validate();
  return style;
}

const std::map<std::string, StyleConfig>& style_table() {
  static std::map<std::string, StyleConfig> table;
  static std::once_flag once;
  std::call_once(once, [] {
    const auto& data = detail::preset_data();
    auto doc = nlohmann::json::parse(data.at("palettes.json"));
    for (const auto& [id, entry] : doc.items()) {
      auto src = data.find("style_" + id + ".sg");
      if (src == data.end())
        throw Error(Errc::config_error,
                    "palette entry '" + id + "' has no matching grammar");
      table.emplace(id, build_style(id, entry, src->second));
    }
  });
  return table;
}

}  // namespace

const std::vector<std::string>& builtin_style_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [id, style] : style_table()) out.push_back(id);
    return out;
  }();
  return ids;
}

StyleConfig load_builtin_style(const std::string& id) {
  const auto& table = style_table();
  auto it = table.find(id);
  if (it == table.end())
    throw Error(Errc::config_error, "unknown built-in style '" + id + "'");
  return it->second;
}

}  // namespace synthcity
