#pragma once

#include <string>
#include <utility>

#include <httplib.h>

#include "testmend/util.hpp"

namespace testmend {

// Splits "http://host:port/prefix" into client base and path prefix.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::pair<int, std::string> http_post_json(const std::string& url,
                                                  const std::string& body,
                                                  const std::string& bearer) {
    auto [base, prefix] = split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
    auto res = client.Post(prefix, headers, body, "application/json");
    if (!res) return {0, ""};
    return {res->status, res->body};
}

} // namespace testmend
