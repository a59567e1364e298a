#pragma once

#include <string>
#include <string_view>

namespace e5sh::transport {

// MD5 hex digest. Used only to derive message-type checksums for the
// connection handshake; not a security boundary.
std::string md5_hex(std::string_view data);

}  // namespace e5sh::transport
