#pragma once

#include <map>
#include <string>
#include <string_view>

namespace loopinv::detail {

/// Raw text of an embedded template, by file stem. Throws Error if unknown.
std::string_view template_text(std::string_view name);

/// Substitutes every `{{key}}` of the named template. A placeholder without a
/// value is an error, as is a value that the template never uses.
std::string render_template(std::string_view name,
                            const std::map<std::string, std::string, std::less<>>& values);

}  // namespace loopinv::detail
