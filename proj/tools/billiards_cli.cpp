#include "app.hpp"

int main(int argc, char** argv) { return billiards::app::run(argc, argv); }
