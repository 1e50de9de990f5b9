#include "sdml/error.hpp"

namespace sdml {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorKind::JointCountMismatch: return "JointCountMismatch";
    case ErrorKind::InvalidTarget: return "InvalidTarget";
    case ErrorKind::InvalidTopology: return "InvalidTopology";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::TruncatedFrame: return "TruncatedFrame";
    case ErrorKind::NonNumericField: return "NonNumericField";
    case ErrorKind::MissingReferenceSample: return "MissingReferenceSample";
    case ErrorKind::UnknownAuxiliarySize: return "UnknownAuxiliarySize";
    case ErrorKind::BadLength: return "BadLength";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::WrongJointCount: return "WrongJointCount";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::SingleClassDataset: return "SingleClassDataset";
    case ErrorKind::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::DuplicateClass: return "DuplicateClass";
    case ErrorKind::MissingClass: return "MissingClass";
    case ErrorKind::EmptyGallery: return "EmptyGallery";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace sdml
