#pragma once

#include <stdexcept>
#include <string>

namespace fillight {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Emitter sample coincides with the shaded point.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated a shape or sizing precondition.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class AssetErrorCode {
    kMissingFile,
    kDimensionMismatch,
    kUndecodable,
};

const char* to_string(AssetErrorCode code);

class AssetError : public std::runtime_error {
public:
    AssetError(AssetErrorCode code, std::string asset, const std::string& message)
        : std::runtime_error(message), code_(code), asset_(std::move(asset)) {}

    AssetErrorCode code() const noexcept { return code_; }
    const std::string& asset() const noexcept { return asset_; }

private:
    AssetErrorCode code_;
    std::string asset_;
};

}  // namespace fillight
