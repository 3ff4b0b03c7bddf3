#ifndef CADRE_ERROR_HPP
#define CADRE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cadre {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two graphs (or a graph and a table) do not share the same node set.
class NodeSetMismatch : public Error {
public:
    using Error::Error;
};

/// A graph operation would violate a structural invariant (self-loop, cycle, duplicate pair).
class GraphError : public Error {
public:
    using Error::Error;
};

class NoConsistentExtension : public Error {
public:
    NoConsistentExtension() : Error("PDAG admits no consistent DAG extension") {}
};

class InfeasibleEdgeCount : public Error {
public:
    using Error::Error;
};

/// The parent Gram (covariance) submatrix of a regression is rank-deficient.
class SingularRegression : public Error {
public:
    using Error::Error;
};

class EmptyReplicate : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace cadre

#endif // CADRE_ERROR_HPP
