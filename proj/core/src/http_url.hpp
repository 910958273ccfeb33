#pragma once

#include <string>
#include <utility>

namespace chronoqa::detail {

// Splits "https://host:port/v1" into the client origin ("https://host:port")
// and the path prefix ("/v1", no trailing slash). httplib clients accept
// only the origin.
inline std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    std::size_t authority_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = base_url.find('/', authority_start);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string origin = base_url.substr(0, path_start);
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {origin, prefix};
}

}  // namespace chronoqa::detail
