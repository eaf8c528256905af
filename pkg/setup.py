import sys

try:
    from setuptools import setup
except ImportError:
    print("mixlab needs setuptools.", file=sys.stderr)
    print("Please install it using your package-manager or pip.", file=sys.stderr)
    sys.exit(1)

setup(name='mixlab',
      version='0.1.0',
      description='Numerical experiments on mixing and dissipation by planar Hamiltonian flows.',
      author='mixlab contributors',
      packages=[
          'mixlab',
          'mixlab.experiments',
          'mixlab.types',
      ],
      entry_points={
          'console_scripts': ['mixlab=mixlab.mixlab:main'],
      },
      python_requires='>=3.8',
      install_requires=[
          'PyYAML>=5.1',
          'numpy>=1.20',
          'scipy>=1.6',
          'sympy>=1.7',
      ],
      classifiers=[
          'Development Status :: 3 - Alpha',
          'Intended Audience :: Science/Research',
          'Topic :: Scientific/Engineering :: Mathematics',
          'Topic :: Scientific/Engineering :: Physics',
          'Natural Language :: English',
          'Operating System :: POSIX :: Linux',
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3.10',
      ],
      zip_safe=False,
      )
