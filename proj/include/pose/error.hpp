#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pose {

// Every failure carries a stable machine-readable category (snake_case) next
// to the human-readable message; the CLI prints "error: <category>: <msg>".
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const { return category_; }

private:
    std::string category_;
};

[[noreturn]] inline void fail(std::string category, const std::string& message) {
    throw Error(std::move(category), message);
}

} // namespace pose
