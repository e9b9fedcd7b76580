#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <string>

namespace rcx {

// Row-major nested arrays. Doubles are written in shortest round-trip form,
// so reading back reproduces every bit. Non-finite values are rejected.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m, const std::string& what);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v, const std::string& what);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rcx
