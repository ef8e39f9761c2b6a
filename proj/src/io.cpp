#include "uvt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace uvt::io {

namespace {

std::string next_token(std::istream& in) {
    std::string token;
    while (in) {
        const int ch = in.peek();
        if (ch == '#') {
            std::string skip;
            std::getline(in, skip);
        } else if (std::isspace(ch)) {
            in.get();
        } else {
            break;
        }
    }
    in >> token;
    return token;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' '))
        s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && s[start] == ' ')
        ++start;
    return s.substr(start);
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double value = 0;
    const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
    if (result.ec != std::errc{} || result.ptr != t.data() + t.size())
        throw InvalidInput("not a number: '" + text + "'");
    return value;
}

ImageGrid read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    if (next_token(in) != "P5")
        throw IoError(path.string() + ": not a binary PGM (P5)");
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed PGM header");
    }
    in.get(); // single whitespace before the raster
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw IoError(path.string() + ": malformed PGM header");
    if (width != height)
        throw IoError(path.string() + ": image is not square (" + std::to_string(width) + "x" +
                      std::to_string(height) + ")");
    if (width < 2)
        throw IoError(path.string() + ": image too small");

    const std::size_t bytes_per = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw IoError(path.string() + ": truncated raster");

    ImageGrid img(width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c);
            const unsigned v = bytes_per == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | unsigned(raw[2 * i + 1]);
            img.pixels(r, c) = double(v) / double(maxval);
        }
    return img;
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& image, int maxval) {
    if (maxval <= 0 || maxval > 65535)
        throw InvalidInput("PGM maxval must be in [1, 65535]");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    const Index s = image.size();
    out << "P5\n" << s << ' ' << s << '\n' << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<std::size_t>(s * s) * 2);
    for (Index r = 0; r < s; ++r)
        for (Index c = 0; c < s; ++c) {
            const double v = std::clamp(image.pixels(r, c), 0.0, 1.0);
            const auto q = static_cast<unsigned>(std::lround(v * maxval));
            if (maxval < 256) {
                raw.push_back(static_cast<unsigned char>(q));
            } else {
                raw.push_back(static_cast<unsigned char>(q >> 8));
                raw.push_back(static_cast<unsigned char>(q & 0xff));
            }
        }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

Sinogram read_sinogram_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw IoError(path.string() + ": empty file");
    const auto header = split_csv_line(trim(line));
    if (header.size() < 3 || header[0] != "angle")
        throw IoError(path.string() + ": expected header 'angle,s_0,...'");
    const std::size_t detectors = header.size() - 1;

    std::vector<std::vector<double>> rows;
    std::vector<std::optional<double>> angles;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != detectors + 1)
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(detectors + 1) + " fields");
        try {
            const std::string a = trim(fields[0]);
            angles.push_back(a.empty() ? std::nullopt : std::optional<double>(parse_double(a)));
            std::vector<double> row(detectors);
            for (std::size_t j = 0; j < detectors; ++j)
                row[j] = parse_double(fields[j + 1]);
            rows.push_back(std::move(row));
        } catch (const InvalidInput& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (rows.empty())
        throw IoError(path.string() + ": no projections");
    Sinogram sino(static_cast<Index>(rows.size()), static_cast<Index>(detectors));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < detectors; ++j)
            sino.samples(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    sino.angles = std::move(angles);
    return sino;
}

void write_sinogram_csv(const std::filesystem::path& path, const Sinogram& sinogram) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << "angle";
    for (Index j = 0; j < sinogram.detector_count(); ++j)
        out << ",s_" << j;
    out << '\n';
    for (Index i = 0; i < sinogram.count(); ++i) {
        const auto& a = sinogram.angles[static_cast<std::size_t>(i)];
        if (a)
            out << format_double(*a);
        for (Index j = 0; j < sinogram.detector_count(); ++j)
            out << ',' << format_double(sinogram.samples(i, j));
        out << '\n';
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

void write_indexed_csv(const std::filesystem::path& path, const std::string& value_name,
                       const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << "index," << value_name << '\n';
    for (std::size_t i = 0; i < values.size(); ++i)
        out << i << ',' << format_double(values[i]) << '\n';
}

std::vector<double> read_indexed_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<double> values;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw IoError(path.string() + ": expected 'index,value' rows");
        const auto index = static_cast<std::size_t>(std::stoul(fields[0]));
        if (index != values.size())
            throw IoError(path.string() + ": indices must be consecutive from 0");
        values.push_back(parse_double(fields[1]));
    }
    return values;
}

void write_raster_csv(const std::filesystem::path& path, const ImageGrid& image) {
    validate(image);
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    for (Index r = 0; r < image.size(); ++r) {
        for (Index c = 0; c < image.size(); ++c)
            out << (c ? "," : "") << format_double(image.pixels(r, c));
        out << '\n';
    }
}

ImageGrid read_raster_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty())
            continue;
        std::vector<double> row;
        for (const auto& f : split_csv_line(line))
            row.push_back(parse_double(f));
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Index>(rows.size());
    if (n == 0)
        throw IoError(path.string() + ": empty raster");
    ImageGrid image(n);
    for (Index r = 0; r < n; ++r) {
        if (static_cast<Index>(rows[static_cast<std::size_t>(r)].size()) != n)
            throw IoError(path.string() + ": raster must be square");
        for (Index c = 0; c < n; ++c)
            image.pixels(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    return image;
}

} // namespace uvt::io
