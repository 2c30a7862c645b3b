#pragma once

#include <stdexcept>
#include <string>

namespace uiattest {

// Malformed artifact bytes (manifests, logs, image containers).
// Parsers throw this instead of crashing; arbitrary input must never UB.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and OS level failures while reading or writing artifacts.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace uiattest
