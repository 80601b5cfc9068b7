#include "templates.hpp"

#include <set>
#include <utility>

#include "loopinv/error.hpp"

namespace loopinv::detail {

extern const std::pair<std::string_view, std::string_view> kTemplateTable[];
extern const std::size_t kTemplateCount;

std::string_view template_text(std::string_view name) {
  for (std::size_t i = 0; i < kTemplateCount; ++i)
    if (kTemplateTable[i].first == name) return kTemplateTable[i].second;
  throw Error("unknown prompt template '" + std::string(name) + "'");
}

std::string render_template(std::string_view name,
                            const std::map<std::string, std::string, std::less<>>& values) {
  std::string_view text = template_text(name);
  std::string out;
  std::set<std::string_view> used;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    std::string_view key = text.substr(open + 2, close - open - 2);
    auto it = values.find(key);
    if (it == values.end())
      throw Error("template '" + std::string(name) + "' needs a value for " + std::string(key));
    out.append(text.substr(pos, open - pos));
    out.append(it->second);
    used.insert(it->first);
    pos = close + 2;
  }
  out.append(text.substr(pos));
  for (const auto& [key, _] : values)
    if (!used.count(key))
      throw Error("template '" + std::string(name) + "' has no placeholder " + key);
  return out;
}

}  // namespace loopinv::detail
