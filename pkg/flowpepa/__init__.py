# flowpepa package
