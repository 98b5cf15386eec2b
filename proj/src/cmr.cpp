namespace hillstark {}
