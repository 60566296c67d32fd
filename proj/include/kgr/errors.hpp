#pragma once

#include <stdexcept>
#include <string>

namespace kgr {

// Exit-code taxonomy: usage = 1, data = 2, endpoint = 3.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EndpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace kgr
