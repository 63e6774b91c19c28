// Error taxonomy shared by the library and the command line tool.
//
// UsageError  -> caller violated a contract (bad arguments, bad config keys,
//                unknown column names, invalid options). CLI exit code 1.
// DataError   -> the input data is malformed or does not match its declared
//                schema (unreadable file, missing declared column). Exit 2.
// NumericError-> the computation cannot proceed numerically (rank-deficient
//                design, envelope violations, exhausted resampling). Exit 3.
#pragma once

#include <stdexcept>
#include <string>

namespace rely {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace rely
