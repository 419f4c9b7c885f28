namespace mcflow {}
