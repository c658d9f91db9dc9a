#pragma once

#include <filesystem>

// service.hpp pulls in Eigen, which must precede the resolver macros httplib brings in
#include "rep/service/service.hpp"

#include <httplib.h>

namespace rep::service {

/// HTTP status for an engine error code family.
int http_status(const std::exception& e);

/// Registers the JSON API, the link redirect and, when `static_dir` exists,
/// the static web client under "/".
void mount_routes(httplib::Server& server, Service& service, const std::filesystem::path& static_dir);

} // namespace rep::service
