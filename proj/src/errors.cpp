#include "fillight/errors.hpp"

namespace fillight {

const char* to_string(AssetErrorCode code) {
    switch (code) {
        case AssetErrorCode::kMissingFile:
            return "missing-file";
        case AssetErrorCode::kDimensionMismatch:
            return "dimension-mismatch";
        case AssetErrorCode::kUndecodable:
            return "undecodable";
    }
    return "unknown";
}

}  // namespace fillight
